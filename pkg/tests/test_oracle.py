import math

import numpy as np
import pytest
from scipy.linalg import eigvalsh, eigvalsh_tridiagonal

from pdm_spectra import analytic, oracle
from pdm_spectra.analytic import bound_state, energy, pt_params
from pdm_spectra.errors import BracketError, InvalidInputError
from pdm_spectra.harness import convergence_slope
from pdm_spectra.model import MassModel, Parity, QuantumNumbers, mass_at
from pdm_spectra.pct import PctMap

from conftest import lorentzian_as_numeric


def random_tridiagonal(seed, n=128):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) * 5, rng.normal(size=n - 1)


@pytest.mark.parametrize("seed", range(4))
def test_sturm_count_matches_dense_diagonalization(seed):
    diag, off = random_tridiagonal(seed)
    evals = eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
    rng = np.random.default_rng(100 + seed)
    trials = np.concatenate([rng.uniform(evals[0] - 1, evals[-1] + 1, 50),
                             0.5 * (evals[:-1] + evals[1:])[::7]])
    for x in trials:
        assert oracle.sturm_count(diag, off, x) == np.count_nonzero(evals < x)


def test_sturm_count_on_pt_matrix():
    tri = oracle.pt_tridiagonal(pt_params(QuantumNumbers(0, 1, 2), 1.0), 128)
    evals = eigvalsh(tri.dense())
    for x in np.linspace(evals[0] - 1, evals[20], 40):
        assert oracle.sturm_count(tri.diag, tri.off, x) == np.count_nonzero(evals < x)


@pytest.mark.parametrize("seed", range(4))
def test_bisection_matches_lapack(seed):
    diag, off = random_tridiagonal(seed, 300)
    ours = oracle.lowest_eigenvalues(diag, off, 8)
    ref = eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 7))
    np.testing.assert_allclose(ours, ref, rtol=0, atol=1e-10)


def test_bisection_detects_broken_matrix():
    diag, off = random_tridiagonal(0, 64)
    diag[10] = np.nan
    with pytest.raises(BracketError):
        oracle.lowest_eigenvalues(diag, off, 2)


def test_schemes_by_branch():
    def scheme(qn):
        return oracle.pt_tridiagonal(pt_params(qn, 1.0), 64).scheme

    assert scheme(QuantumNumbers(0, 0, 3)) == "dirichlet"
    assert scheme(QuantumNumbers(0, 0, 1, Parity.ODD)) == "dirichlet"
    assert scheme(QuantumNumbers(0, 0, 1, Parity.EVEN)) == "reflecting"
    assert scheme(QuantumNumbers(0, 0, 2)) == "weighted"
    assert scheme(QuantumNumbers(0, 2, 3)) == "weighted"


def test_matrix_is_symmetric_tridiagonal():
    tri = oracle.pt_tridiagonal(pt_params(QuantumNumbers(0, 1, 4), 1.0), 100)
    dense = tri.dense()
    assert np.array_equal(dense, dense.T)
    assert tri.size == 100 and tri.off.size == 99


def test_ground_state_d3():
    rep = oracle.solve_pt(pt_params(QuantumNumbers(0, 0, 3), 1.0), 3, 8192)
    assert rep.extrapolated[0] == pytest.approx(8.0, rel=1e-8)
    assert rep.energies[0] == pytest.approx(7.5, rel=1e-8)
    assert rep.shift_applied == -0.5


def test_even_branch_ground_state():
    rep = oracle.solve_pt(pt_params(QuantumNumbers(0, 0, 1, "even"), 1.0), 3, 8192)
    assert rep.energies[0] == pytest.approx(1.5, rel=1e-8)


def test_report_invariants():
    rep = oracle.solve_pt(pt_params(QuantumNumbers(0, 1, 5), 0.7), 6, 2048)
    assert np.all(np.diff(rep.eigenvalues) > 0)
    assert np.all(np.diff(rep.energies) > 0)
    np.testing.assert_array_equal(rep.error_estimates, np.abs(rep.extrapolated - rep.eigenvalues))
    assert rep.domain == (0.0, pytest.approx(math.pi / 1.4))
    assert rep.grid_size == 2048


@pytest.mark.parametrize("n_states,grid", [(1, 32), (17, 64), (0, 128), (2, 100.5)])
def test_invalid_sizes(n_states, grid):
    with pytest.raises(InvalidInputError):
        oracle.solve_pt(pt_params(QuantumNumbers(0, 0, 3), 1.0), n_states, grid)


def test_convergence_order():
    slope, errs = convergence_slope((1000, 2000, 4000))
    assert 1.7 <= slope <= 2.3
    assert errs[0] > errs[1] > errs[2]


def test_richardson_improves_most_states():
    improved = total = 0
    for ell, d, p in [(0, 3, None), (1, 3, None), (0, 2, None), (2, 5, None),
                      (0, 1, "even"), (0, 1, "odd")]:
        for zeta in (0.5, 1.0, 2.0):
            qn0 = QuantumNumbers(0, ell, d, p)
            rep = oracle.solve_pt(pt_params(qn0, zeta), 5, 2048)
            for n in range(5):
                exact = energy(QuantumNumbers(n, ell, d, p), zeta)
                improved += abs(rep.energies[n] - exact) < abs(rep.energies_finest[n] - exact)
                total += 1
    assert improved >= 0.9 * total


@pytest.mark.parametrize("qn", [QuantumNumbers(0, 0, 2), QuantumNumbers(0, 1, 2),
                                QuantumNumbers(0, 2, 4), QuantumNumbers(0, 0, 3)])
def test_singular_cases_converge(qn):
    rep = oracle.solve_pt(pt_params(qn, 1.0), 4, 4096)
    exact = [energy(QuantumNumbers(n, qn.ell, qn.d), 1.0) for n in range(4)]
    np.testing.assert_allclose(rep.energies, exact, rtol=1e-7)


@pytest.mark.parametrize("qn", [QuantumNumbers(0, 0, 3), QuantumNumbers(0, 1, 2),
                                QuantumNumbers(0, 0, 1, "even"), QuantumNumbers(0, 0, 1, "odd")])
@pytest.mark.parametrize("zeta", [0.5, 2.0])
def test_general_potential_route(qn, zeta):
    rep = oracle.solve_profile(PctMap(MassModel.lorentzian(zeta), qn.d), qn, 4, 4096)
    assert rep.shift_applied == 0.0
    exact = [energy(QuantumNumbers(n, qn.ell, qn.d, qn.parity), zeta) for n in range(4)]
    np.testing.assert_allclose(rep.energies, exact, rtol=1e-7)


def test_numeric_profile_route():
    qn = QuantumNumbers(0, 1, 3)
    model = lorentzian_as_numeric(1.0)
    rep = oracle.solve_profile(PctMap(model, 3), qn, 3, 1024, q_top=math.pi / 2)
    exact = [energy(QuantumNumbers(n, 1, 3), 1.0) for n in range(3)]
    np.testing.assert_allclose(rep.energies, exact, rtol=1e-6)


def test_numeric_profile_needs_domain(numeric_lorentzian):
    with pytest.raises(InvalidInputError):
        oracle.solve_profile(PctMap(numeric_lorentzian, 3), QuantumNumbers(0, 0, 3), 2, 256)


def test_constant_mass_is_particle_in_a_box(flat_mass):
    width = 2.0
    rep = oracle.solve_profile(PctMap(flat_mass, 3), QuantumNumbers(0, 0, 3), 4, 2048, q_top=width)
    exact = 0.5 * (np.pi * np.arange(1, 5) / width) ** 2
    np.testing.assert_allclose(rep.energies, exact, rtol=1e-9)


def test_residual_ground_state():
    state = bound_state(QuantumNumbers(0, 0, 3), 1.0)
    r = np.linspace(0.05, 20.0, 500)
    terms = oracle.residual_terms(state, r)
    res = oracle.residual_eq1(state, r)
    assert np.max(np.abs(res)) <= 1e-9 * np.max(np.abs(terms))


def test_residual_excited_state():
    state = bound_state(QuantumNumbers(3, 0, 3), 1.0)
    r = np.linspace(0.05, 20.0, 500)
    assert np.max(oracle.relative_residual(state, r)) <= 1e-9


def test_residual_detects_wrong_energy():
    state = bound_state(QuantumNumbers(0, 0, 3), 1.0)
    r = np.linspace(0.05, 20.0, 500)
    res = oracle.residual_eq1(state, r, energy=state.energy + 0.1)
    m = mass_at(MassModel.lorentzian(1.0), r)[0]
    np.testing.assert_allclose(res, 0.2 * m * state.radial(r), rtol=1e-6, atol=1e-12)
    assert np.max(oracle.relative_residual(state, r, energy=state.energy + 0.1)) > 1e-3


def test_residual_rejects_origin():
    with pytest.raises(InvalidInputError):
        oracle.residual_eq1(bound_state(QuantumNumbers(0, 0, 3), 1.0), np.array([0.0, 1.0]))
