import math

import numpy as np
import pytest

from pdm_spectra import harness
from pdm_spectra.harness import (SweepConfig, degeneracy_ladder, full_comparison,
                                 orthonormality_matrix, sweep_states)
from pdm_spectra.model import Parity, QuantumNumbers


def test_ladder_p_wave_three_dimensions():
    rep = degeneracy_ladder(0, 1, 3, 1.0, run_oracle=True, grid_size=4096)
    assert [(r.ell, r.d) for r in rep.ladder] == [(1, 3), (0, 5)]
    # Delta = sqrt(33) and 7 respectively
    expected_first = 0.5 * ((2.5 + math.sqrt(33) / 2) ** 2 - 1)
    assert rep.ladder[0].E_analytic == pytest.approx(expected_first, rel=1e-15)
    assert rep.ladder[0].E_analytic == pytest.approx(13.9307, abs=5e-5)
    assert rep.ladder[1].E_analytic == 17.5
    assert rep.max_pairwise_spread == pytest.approx(3.5693, abs=1e-4)
    assert not rep.claim_satisfied
    for rung in rep.ladder:
        assert rung.ell_d == 1.0
        assert rung.rel_diff <= 1e-5


def test_ladder_without_oracle():
    rep = degeneracy_ladder(2, 3, 2, 0.5, run_oracle=False)
    assert len(rep.ladder) == 4
    assert all(r.E_numeric is None and r.abs_diff is None for r in rep.ladder)
    assert len({r.ell_d for r in rep.ladder}) == 1


@pytest.mark.parametrize("n,ell,d_start", [(0, 1, 2), (1, 4, 3), (3, 2, 2)])
def test_spread_definition(n, ell, d_start):
    rep = degeneracy_ladder(n, ell, d_start, 1.3, run_oracle=False)
    energies = [r.E_analytic for r in rep.ladder]
    assert rep.max_pairwise_spread == max(energies) - min(energies)
    assert [r.d for r in rep.ladder] == [d_start + 2 * k for k in range(ell + 1)]


def test_ladder_preconditions():
    with pytest.raises(ValueError):
        degeneracy_ladder(0, 0, 3, 1.0)
    with pytest.raises(ValueError):
        degeneracy_ladder(0, 1, 4, 1.0)


@pytest.mark.parametrize("ell,d,parity", [(0, 3, None), (2, 2, None), (0, 1, Parity.EVEN),
                                          (0, 1, Parity.ODD), (1, 5, None)])
def test_orthonormality(ell, d, parity):
    res = orthonormality_matrix(ell, d, 1.0, 6, parity)
    g = res.matrix
    assert np.max(np.abs(np.diag(g) - 1)) <= 1e-8
    assert np.max(np.abs(g - np.diag(np.diag(g)))) <= 1e-8
    assert np.array_equal(g, g.T)
    assert res.max_deviation <= 1e-8


def test_orthonormality_size_cap():
    with pytest.raises(ValueError):
        orthonormality_matrix(0, 3, 1.0, 11)


def test_flagship_comparison():
    rows = full_comparison(SweepConfig(n_max=4, ell_max=2, d_list=(3,), zetas=(1.0,)))
    assert len(rows) == 15
    assert all(r.passed for r in rows), [r.failures for r in rows if not r.passed]
    first = rows[0]
    assert (first.qn, first.E_analytic) == (QuantumNumbers(0, 0, 3), 7.5)
    for row in rows:
        assert row.nodes == row.qn.n_r
        assert row.rel_err <= 1e-5 and row.norm_error <= 1e-8 and row.residual_max <= 1e-8


def test_empty_sweep():
    assert full_comparison(SweepConfig(n_max=-1)) == []
    assert full_comparison(SweepConfig(d_list=())) == []


def test_fault_injection_marks_row_failed():
    target = QuantumNumbers(2, 1, 3)
    cfg = SweepConfig(n_max=3, ell_max=1, d_list=(3,), grid_size=2048,
                      perturb=lambda qn, z: 0.5 if qn == target else 0.0)
    rows = full_comparison(cfg)
    failed = [r for r in rows if not r.passed]
    assert [r.qn for r in failed] == [target]
    assert "oracle" in failed[0].failures and "residual" in failed[0].failures


def test_solver_failure_is_recorded_per_row():
    rows = full_comparison(SweepConfig(n_max=20, ell_max=0, d_list=(3,), grid_size=64))
    assert len(rows) == 21
    assert all(not r.passed and r.error for r in rows)


def test_sweep_order_and_d1_parities():
    qns = list(sweep_states(1, 2, (1, 3)))
    assert qns[:4] == [QuantumNumbers(0, 0, 1, "even"), QuantumNumbers(1, 0, 1, "even"),
                       QuantumNumbers(0, 0, 1, "odd"), QuantumNumbers(1, 0, 1, "odd")]
    assert len(qns) == 4 + 6
    assert list(sweep_states(0, 0, (1,), parity="odd")) == [QuantumNumbers(0, 0, 1, "odd")]


def test_thread_setting_does_not_change_results(monkeypatch):
    cfg = SweepConfig(n_max=2, ell_max=1, d_list=(1, 2), grid_size=1024, full_checks=False)
    monkeypatch.setenv(harness.THREADS_ENV, "1")
    serial = full_comparison(cfg)
    monkeypatch.setenv(harness.THREADS_ENV, "4")
    threaded = full_comparison(cfg)
    assert serial == threaded


@pytest.mark.parametrize("raw,expected", [("3", 3), ("0", None), ("x", None), ("", None)])
def test_thread_env_parsing(monkeypatch, raw, expected):
    monkeypatch.setenv(harness.THREADS_ENV, raw)
    value = harness.max_workers()
    if expected is None:
        assert value >= 1
    else:
        assert value == expected


def test_tolerance_overrides():
    tol = harness.DEFAULT_TOLERANCES.updated(oracle_rel="1e-3")
    assert tol.oracle_rel == 1e-3 and tol.norm == 1e-8
    with pytest.raises(KeyError):
        harness.DEFAULT_TOLERANCES.updated(bogus=1)
