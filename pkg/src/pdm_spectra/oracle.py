"""Independent finite-difference verification.

The transformed problem ``-phi''/2 + V(q) phi = eps phi`` is discretized on
the finite q-interval into a symmetric tridiagonal matrix whose lowest
eigenvalues are found by Sturm-sequence bisection, at two grid sizes, then
Richardson-extrapolated. A separate routine applies the original radial
operator to the closed-form radial functions and reports residuals.

Three grid schemes are used, chosen by the inverse-square coefficient
``a`` of the potential at ``q -> 0``:

* ``dirichlet``: ``a == 0`` with ``phi(0) = 0``; nodes at ``q_j = j h``.
* ``reflecting``: ``a == 0`` with ``phi'(0) = 0`` (even states, d = 1);
  nodes at ``(j + 1/2) h``.
* ``weighted``: ``a != 0``. Writing ``phi = w u`` with ``w ~ q^s``,
  ``s(s-1) = a``, removes the singular term and leaves the symmetric
  flux form ``-(w^2 u')'/2 + w^2 (V - w''/2w) u = eps w^2 u``; nodes at
  ``(j + 1/2) h``. Plain nodes fail for the critical coefficient
  ``a = -1/4`` (even d, l = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.integrate import solve_ivp

from .analytic import BoundState, PTParams
from .errors import BracketError, InvalidInputError
from .model import MassModel, QuantumNumbers, mass_at
from .pct import PctMap, v_eff_of_r

__all__ = [
    "EigenReport",
    "Tridiagonal",
    "sturm_count",
    "lowest_eigenvalues",
    "pt_tridiagonal",
    "profile_tridiagonal",
    "solve_pt",
    "solve_profile",
    "residual_terms",
    "residual_eq1",
    "relative_residual",
]

MIN_GRID = 64


@numba.njit(cache=True, nogil=True)
def _sturm_count(diag, off2, x, pivmin):
    count = 0
    d = diag[0] - x
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        count += 1
    for i in range(1, diag.shape[0]):
        d = diag[i] - x - off2[i - 1] / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            count += 1
    return count


@numba.njit(cache=True, nogil=True)
def _bisect(diag, off2, index, lo, hi, rtol, pivmin):
    # invariant: count(lo) <= index < count(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rtol * max(1.0, abs(mid)) or mid <= lo or mid >= hi:
            break
        if _sturm_count(diag, off2, mid, pivmin) > index:
            hi = mid
        else:
            lo = mid
    return lo, hi


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal operator with its grid metadata."""

    diag: np.ndarray
    off: np.ndarray
    h: float
    domain: tuple[float, float]
    nodes: np.ndarray
    scheme: str

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


def _pivmin(off) -> float:
    big = float(np.max(off**2)) if off.size else 1.0
    return np.finfo(float).tiny * max(1.0, big)


def sturm_count(diag, off, x: float) -> int:
    """Number of eigenvalues of the tridiagonal matrix strictly below ``x``."""
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.ascontiguousarray(off, dtype=float)
    return int(_sturm_count(diag, off * off, float(x), _pivmin(off)))


def lowest_eigenvalues(diag, off, n_states: int, rtol: float = 1e-12) -> np.ndarray:
    """Lowest ``n_states`` eigenvalues by Sturm-sequence bisection.

    Brackets come from Gershgorin discs and are narrowed to a width of
    ``rtol * max(1, |eps|)``.

    Raises
    ------
    BracketError
        If the Sturm counts at the Gershgorin bounds do not bracket the
        requested indices.
    """
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.ascontiguousarray(off, dtype=float)
    off2 = off * off
    pivmin = _pivmin(off)
    radius = np.zeros_like(diag)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    g_lo = float(np.min(diag - radius))
    g_hi = float(np.max(diag + radius))
    pad = 1e-12 * max(1.0, abs(g_lo), abs(g_hi))
    g_lo -= pad
    g_hi += pad
    if _sturm_count(diag, off2, g_lo, pivmin) != 0 or \
            _sturm_count(diag, off2, g_hi, pivmin) != diag.size:
        raise BracketError("Gershgorin bounds do not bracket the spectrum")
    out = np.empty(n_states)
    lo = g_lo
    for k in range(n_states):
        a, b = _bisect(diag, off2, k, lo, g_hi, rtol, pivmin)
        count_a = _sturm_count(diag, off2, a, pivmin)
        count_b = _sturm_count(diag, off2, b, pivmin)
        if count_a > k or count_b <= k:
            raise BracketError(f"lost bracket for eigenvalue {k}: counts {count_a}, {count_b}")
        out[k] = 0.5 * (a + b)
        lo = a
    return out


def _dirichlet(potential, top, n):
    h = top / (n + 1)
    q = h * np.arange(1, n + 1)
    diag = 1.0 / h**2 + potential(q)
    off = np.full(n - 1, -0.5 / h**2)
    return Tridiagonal(diag, off, h, (0.0, top), q, "dirichlet")


def _reflecting(potential, top, n):
    h = top / (n + 0.5)
    q = h * (np.arange(n) + 0.5)
    diag = 1.0 / h**2 + potential(q)
    diag[0] -= 0.5 / h**2
    off = np.full(n - 1, -0.5 / h**2)
    return Tridiagonal(diag, off, h, (0.0, top), q, "reflecting")


def _weighted(weight_sq, reduced_potential, top, n):
    h = top / (n + 0.5)
    q = h * (np.arange(n) + 0.5)
    p = weight_sq(h * np.arange(n + 1))
    w2 = weight_sq(q)
    diag = 0.5 * (p[:-1] + p[1:]) / (h * h * w2) + reduced_potential(q)
    off = -0.5 * p[1:-1] / (h * h * np.sqrt(w2[:-1] * w2[1:]))
    return Tridiagonal(diag, off, h, (0.0, top), q, "weighted")


def _check_sizes(n_states, grid_size):
    if int(grid_size) != grid_size or grid_size < MIN_GRID:
        raise InvalidInputError(f"grid_size must be an integer >= {MIN_GRID}, got {grid_size}")
    if n_states < 1 or n_states > grid_size // 4:
        raise InvalidInputError(
            f"n_states must lie in [1, grid_size/4] = [1, {grid_size // 4}], got {n_states}")


def pt_tridiagonal(params: PTParams, grid_size: int) -> Tridiagonal:
    """Discretize ``-d^2/dq^2 / 2 + zeta^2/2 [a/sin^2 + b/cos^2]`` on ``(0, pi/2zeta)``.

    ``a = kappa(kappa-1)`` and ``b = lambda(lambda-1)``; the constant
    ``-zeta^2/2`` is not included.
    """
    z = params.zeta
    a = params.kappa * (params.kappa - 1.0)
    b = params.lam * (params.lam - 1.0)
    top = params.q_top
    half_z2 = 0.5 * z * z

    if a == 0.0:
        def potential(q):
            return half_z2 * b / np.cos(z * q) ** 2
        if params.kappa == 0.0:
            return _reflecting(potential, top, grid_size)
        return _dirichlet(potential, top, grid_size)

    s = 0.5 + math.sqrt(0.25 + a)

    def weight_sq(q):
        return np.sin(z * q) ** (2.0 * s)

    def reduced(q):
        # sin^-2 terms cancel exactly between V and w''/2w
        return half_z2 * b / np.cos(z * q) ** 2 + half_z2 * s * s

    return _weighted(weight_sq, reduced, top, grid_size)


def _radii_on_grid(model: MassModel, q):
    """``r(q)`` for a numeric profile by integrating ``dr/dq = m(r)^(-1/2)``."""
    q = np.asarray(q, dtype=float)

    def rhs(_, y):
        return [1.0 / math.sqrt(float(mass_at(model, y[0])[0]))]

    sol = solve_ivp(rhs, (0.0, float(q[-1])), [0.0], method="DOP853",
                    t_eval=q, rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise InvalidInputError(f"coordinate inversion failed: {sol.message}")
    return sol.y[0]


def profile_tridiagonal(pmap: PctMap, qn: QuantumNumbers, grid_size: int,
                        q_top: float | None = None) -> Tridiagonal:
    """Discretize ``-d^2/dq^2 / 2 + V_eff(q)`` using the general potential assembly.

    ``V_eff`` comes from the mass profile and its derivatives only; no
    Poschl-Teller parameters are used. The weight for singular centrifugal
    terms is ``q^(l_d + 1)``.
    """
    model = pmap.model
    if q_top is None:
        if not model.is_lorentzian:
            raise InvalidInputError("q_top is required for numeric profiles")
        q_top = math.pi / (2.0 * model.zeta)
    ell_d = float(qn.ell_d)
    big_l = ell_d * (ell_d + 1.0)

    def radii(q):
        if model.is_lorentzian:
            return np.tan(model.zeta * q) / model.zeta
        return _radii_on_grid(model, q)

    def potential(q):
        return v_eff_of_r(model, pmap.d, ell_d, radii(q))

    if big_l == 0.0:
        if qn.d == 1 and ell_d == -1.0:
            return _reflecting(potential, q_top, grid_size)
        return _dirichlet(potential, q_top, grid_size)

    s = ell_d + 1.0

    def weight_sq(q):
        return q ** (2.0 * s)

    def reduced(q):
        return potential(q) - 0.5 * big_l / (q * q)

    return _weighted(weight_sq, reduced, q_top, grid_size)


@dataclass(frozen=True)
class EigenReport:
    """Numerical eigenvalues with grid metadata.

    ``eigenvalues`` are those of the discretized operator on the finest
    grid, ``extrapolated`` the Richardson combination with the half-size
    grid. Physical energies are ``extrapolated + shift_applied``.
    """

    grid_size: int
    domain: tuple[float, float]
    eigenvalues: np.ndarray
    coarse_eigenvalues: np.ndarray
    extrapolated: np.ndarray
    error_estimates: np.ndarray
    shift_applied: float
    scheme: str

    @property
    def energies(self) -> np.ndarray:
        return self.extrapolated + self.shift_applied

    @property
    def energies_finest(self) -> np.ndarray:
        return self.eigenvalues + self.shift_applied


def _richardson(build, n_states, grid_size, shift) -> EigenReport:
    _check_sizes(n_states, grid_size)
    fine = build(grid_size)
    coarse = build(grid_size // 2)
    e_fine = lowest_eigenvalues(fine.diag, fine.off, n_states)
    e_coarse = lowest_eigenvalues(coarse.diag, coarse.off, n_states)
    hf2, hc2 = fine.h**2, coarse.h**2
    extrap = (hc2 * e_fine - hf2 * e_coarse) / (hc2 - hf2)
    return EigenReport(
        grid_size=int(grid_size),
        domain=fine.domain,
        eigenvalues=e_fine,
        coarse_eigenvalues=e_coarse,
        extrapolated=extrap,
        error_estimates=np.abs(extrap - e_fine),
        shift_applied=shift,
        scheme=fine.scheme,
    )


def solve_pt(params: PTParams, n_states: int = 5, grid_size: int = 8192) -> EigenReport:
    """Lowest Poschl-Teller levels ``eps`` and energies ``E = eps - zeta^2/2``."""
    return _richardson(lambda n: pt_tridiagonal(params, n), n_states, grid_size,
                       -0.5 * params.zeta**2)


def solve_profile(pmap: PctMap, qn: QuantumNumbers, n_states: int = 5,
                  grid_size: int = 4096, q_top: float | None = None) -> EigenReport:
    """Energies from the general effective potential of an arbitrary profile.

    The potential already carries every constant, so ``shift_applied`` is 0.
    """
    return _richardson(lambda n: profile_tridiagonal(pmap, qn, n, q_top),
                       n_states, grid_size, 0.0)


def residual_terms(state: BoundState, r, energy: float | None = None) -> np.ndarray:
    """The five terms of the radial operator applied to ``R``, stacked on axis 0.

    ``R''``, ``-l_d(l_d+1) R/r^2``, ``(m'/m)(d-1) R/(2r)``, ``-(m'/m) R'`` and
    ``2 m E R``.
    """
    from .analytic import radial_derivs

    r = np.asarray(r, dtype=float)
    if np.any(r == 0.0):
        raise InvalidInputError("residual grid must avoid r = 0")
    e = state.energy if energy is None else energy
    d = state.qn.d
    ell_d = float(state.params.ell_d)
    R, R1, R2 = radial_derivs(state, r)
    m, dm, _ = mass_at(MassModel.lorentzian(state.params.zeta), r)
    ratio = dm / m
    return np.stack([
        R2,
        -ell_d * (ell_d + 1.0) * R / (r * r),
        ratio * (d - 1) * R / (2.0 * r),
        -ratio * R1,
        2.0 * m * e * R,
    ])


def residual_eq1(state: BoundState, r, energy: float | None = None) -> np.ndarray:
    """Pointwise value of the radial operator applied to the closed-form ``R``."""
    return residual_terms(state, r, energy).sum(axis=0)


def relative_residual(state: BoundState, r, energy: float | None = None) -> np.ndarray:
    """``|residual| / max |term|`` pointwise."""
    terms = residual_terms(state, r, energy)
    scale = np.max(np.abs(terms), axis=0)
    return np.abs(terms.sum(axis=0)) / np.where(scale > 0, scale, 1.0)
