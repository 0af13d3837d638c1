"""Point canonical transformation.

``R(r) = g(r) phi(q(r))`` with ``q' = sqrt(m)`` and ``g = m^(1/4)`` turns the
position-dependent-mass radial equation into a constant-mass 1D problem
``-phi''/2 + V_eff(q) phi = E phi``. General formulas work from
``(m, m', m'')``; the squared-Lorentzian profile also has closed forms in ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .errors import DomainError, InvalidInputError, SingularPointError
from .model import MassModel, mass_at

__all__ = [
    "PctMap",
    "q_max",
    "q_integral",
    "q_of_r",
    "r_of_q",
    "g_of_r",
    "u_d_general",
    "u_d_closed",
    "v_eff",
    "v_eff_of_r",
    "ORIGIN_CUTOFF",
]

# below this radius the (d-1)/r term of U_d is replaced by its limit
ORIGIN_CUTOFF = 1e-8
QUAD_TOL = 1e-12


@dataclass(frozen=True)
class PctMap:
    model: MassModel
    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidInputError(f"d must be a positive integer, got {self.d}")


def q_max(pmap: PctMap) -> float:
    """Right end of the q-domain; ``inf`` when unknown for a numeric profile."""
    if pmap.model.is_lorentzian:
        return math.pi / (2.0 * pmap.model.zeta)
    return math.inf


def q_integral(pmap: PctMap, r: float) -> tuple[float, float]:
    """``int_0^r sqrt(m(t)) dt`` by composite quadrature, with its error estimate."""
    r = float(r)
    if r == 0.0:
        return 0.0, 0.0
    lo, hi = (0.0, r) if r > 0 else (r, 0.0)
    model = pmap.model

    def integrand(t):
        return np.sqrt(mass_at(model, t)[0])

    value, err = specfun.quad(integrand, lo, hi, tol=QUAD_TOL)
    return (value if r > 0 else -value), err


def q_of_r(pmap: PctMap, r):
    """Transformed coordinate ``q(r)``; ``arctan(zeta r)/zeta`` for the squared-Lorentzian profile."""
    if pmap.model.is_lorentzian:
        z = pmap.model.zeta
        out = np.arctan(z * np.asarray(r, dtype=float)) / z
        return float(out) if out.ndim == 0 else out
    if np.ndim(r) == 0:
        return q_integral(pmap, r)[0]
    return np.array([q_integral(pmap, x)[0] for x in np.ravel(r)]).reshape(np.shape(r))


def _check_q_domain(pmap: PctMap, q, allow_origin=True):
    q = np.asarray(q, dtype=float)
    top = q_max(pmap)
    lo_ok = (q > -top) if pmap.d == 1 else (q >= 0.0 if allow_origin else q > 0.0)
    if not np.all(lo_ok & (q < top)):
        side = "(-{0}, {0})".format(top) if pmap.d == 1 else "[0, {})".format(top)
        raise DomainError(f"q outside the domain {side}")
    return q


def r_of_q(pmap: PctMap, q):
    """Inverse map ``r(q)``; ``tan(zeta q)/zeta`` for the squared-Lorentzian profile.

    Numeric profiles are inverted by bracketing root search on ``q_of_r``.
    """
    model = pmap.model
    if model.is_lorentzian:
        z = model.zeta
        if np.any(np.abs(z * np.asarray(q, dtype=float)) >= math.pi / 2):
            raise DomainError(f"q must lie in (-pi/(2 zeta), pi/(2 zeta)), got {q!r}")
        out = np.tan(z * np.asarray(q, dtype=float)) / z
        return float(out) if out.ndim == 0 else out
    if np.ndim(q) != 0:
        return np.array([r_of_q(pmap, x) for x in np.ravel(q)]).reshape(np.shape(q))
    q = float(q)
    if q == 0.0:
        return 0.0
    sign = 1.0 if q > 0 else -1.0
    target = abs(q)

    def segment(a, b):
        if a == b:
            return 0.0
        value, _ = specfun.quad(lambda t: np.sqrt(mass_at(model, sign * t)[0]), a, b, tol=QUAD_TOL)
        return value

    # accumulate q over doubling radial segments until the target is bracketed
    lo, q_lo, hi = 0.0, 0.0, 1.0
    while True:
        q_hi = q_lo + segment(lo, hi)
        if q_hi >= target:
            break
        lo, q_lo, hi = hi, q_hi, 2.0 * hi
        if hi > 1e12:
            raise DomainError(f"q={q} exceeds the range of the coordinate map")
    root = brentq(lambda x: q_lo + segment(lo, x) - target, lo, hi,
                  xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return sign * root


def g_of_r(model: MassModel, r):
    """Prefactor ``g = m^(1/4)``."""
    return mass_at(model, r)[0] ** 0.25


def _u_terms(model: MassModel, d: int, r):
    m, dm, d2m = mass_at(model, r)
    m = np.asarray(m, dtype=float)
    return (d2m / (8.0 * m**2) - 7.0 * dm**2 / (32.0 * m**3)), dm, m


def u_d_general(model: MassModel, d: int, r):
    """Mass-derivative correction ``U_d(r)`` from ``(m, m', m'')``.

    ``m''/(8 m^2) - 7 m'^2/(32 m^3) + (d-1) m'/(4 r m^2)``.

    Raises
    ------
    SingularPointError
        At ``r <= 0`` when ``d >= 2``.
    """
    r_arr = np.asarray(r, dtype=float)
    if d >= 2 and np.any(r_arr <= 0.0):
        raise SingularPointError("U_d has a (d-1)/r term; r must be positive for d >= 2")
    base, dm, m = _u_terms(model, d, r_arr)
    if d == 1:
        out = base
    else:
        out = base + (d - 1) * dm / (4.0 * r_arr * m**2)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _u_d_origin(model: MassModel, d: int) -> float:
    # (d-1) m'(r)/r -> (d-1) m''(0) for an even profile
    m, dm, d2m = (float(v) for v in mass_at(model, 0.0))
    return d2m / (8.0 * m**2) - 7.0 * dm**2 / (32.0 * m**3) + (d - 1) * d2m / (4.0 * m**2)


def u_d_closed(zeta: float, d: int, q):
    """``-zeta^2 d tan^2(zeta q) + zeta^2 (1 - 2d)/2`` for the squared-Lorentzian profile."""
    t = np.tan(zeta * np.asarray(q, dtype=float))
    out = -(zeta * zeta * d) * t * t + 0.5 * zeta * zeta * (1 - 2 * d)
    return float(out) if np.ndim(out) == 0 else out


def _centrifugal_coeffs(ell_d, d):
    big_l = float(ell_d) * (float(ell_d) + 1.0)
    return big_l, big_l + 2.0 * d


def v_eff_of_r(model: MassModel, d: int, ell_d, r):
    """``l_d(l_d+1)/(2 r^2 m) - U_d(r)`` evaluated at radius ``r``.

    Radii below ``ORIGIN_CUTOFF`` use the limiting value of ``U_d``.
    """
    r = np.asarray(r, dtype=float)
    a_coef, _ = _centrifugal_coeffs(ell_d, d)
    near = np.abs(r) < ORIGIN_CUTOFF
    r_safe = np.where(near, 1.0, r)
    u = np.asarray(u_d_general(model, d, np.abs(r_safe) if d > 1 else r_safe))
    u = np.where(near, _u_d_origin(model, d), u)
    m = np.asarray(mass_at(model, r)[0], dtype=float)
    with np.errstate(divide="ignore"):
        cent = np.zeros_like(r) if a_coef == 0.0 else a_coef / (2.0 * r * r * m)
    out = cent - u
    return float(out) if out.ndim == 0 else out


def v_eff(pmap: PctMap, ell_d, q, method: str | None = None):
    """Effective potential in the q coordinate, including the ``-zeta^2/2`` constant.

    Parameters
    ----------
    pmap : PctMap
    ell_d : real
        Effective angular momentum.
    q : float or ndarray
        Point(s) in the q-domain. ``q = 0`` gives ``+inf`` / ``-inf`` when the
        inverse-square coefficient is positive / negative, and a finite
        value when it vanishes.
    method : {"closed", "general"}, optional
        ``"closed"`` evaluates the Poschl-Teller form (squared-Lorentzian profile only);
        ``"general"`` assembles ``l_d(l_d+1)/(2 r^2 m) - U_d(r)`` at
        ``r = r_of_q(q)``. Defaults to closed for the squared-Lorentzian profile.
    """
    model = pmap.model
    if method is None:
        method = "closed" if model.is_lorentzian else "general"
    q_arr = _check_q_domain(pmap, q)
    a_coef, b_coef = _centrifugal_coeffs(ell_d, pmap.d)
    if method == "closed":
        if not model.is_lorentzian:
            raise InvalidInputError("closed-form potential exists only for the squared-Lorentzian profile")
        z = model.zeta
        s2 = np.sin(z * q_arr) ** 2
        c2 = np.cos(z * q_arr) ** 2
        with np.errstate(divide="ignore"):
            cent = np.zeros_like(s2) if a_coef == 0.0 else a_coef / s2
        out = 0.5 * z * z * (cent + b_coef / c2) - 0.5 * z * z
    elif method == "general":
        out = v_eff_of_r(model, pmap.d, ell_d, r_of_q(pmap, q_arr))
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out
