"""Special-function primitives.

Terminating Gauss hypergeometric series, composite Gauss-Legendre
quadrature with dyadic panel refinement, and sign-change node counting.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError, QuadratureError

__all__ = [
    "TerminatingHyp",
    "terminating_hyp",
    "hyp_eval",
    "hyp_eval_derivs",
    "quad",
    "count_nodes",
]


@dataclass(frozen=True)
class TerminatingHyp:
    """``2F1(-n, b; c; x)`` stored as its n+1 polynomial coefficients."""

    n: int
    b: float
    c_param: float
    coefficients: tuple[float, ...]


def terminating_hyp(n: int, b: float, c: float) -> TerminatingHyp:
    """Precompute the coefficients of ``2F1(-n, b; c; x)``.

    Coefficient k is ``(-n)_k (b)_k / ((c)_k k!)``, built by the ratio
    recurrence so no factorials are formed.

    Raises
    ------
    ParameterError
        If ``c + k == 0`` for some ``k < n``.
    """
    if n < 0 or int(n) != n:
        raise ParameterError(f"first parameter must be -n with n a non-negative integer, got n={n}")
    n = int(n)
    coeffs = [1.0]
    for k in range(n):
        denom = (c + k) * (k + 1)
        if denom == 0.0:
            raise ParameterError(f"Pochhammer pole: c={c} gives (c)_{k + 1} = 0")
        coeffs.append(coeffs[-1] * (k - n) * (b + k) / denom)
    return TerminatingHyp(n=n, b=float(b), c_param=float(c), coefficients=tuple(coeffs))


def hyp_eval(h: TerminatingHyp, x):
    """Evaluate the terminating series at ``x`` (scalar or array) by Horner's rule."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for coeff in reversed(h.coefficients):
        acc = acc * x + coeff
    return acc if acc.ndim else float(acc)


def hyp_eval_derivs(h: TerminatingHyp, x):
    """Return the polynomial and its first two x-derivatives at ``x``."""
    x = np.asarray(x, dtype=float)
    p = np.zeros_like(x)
    dp = np.zeros_like(x)
    d2p = np.zeros_like(x)
    for coeff in reversed(h.coefficients):
        d2p = d2p * x + 2.0 * dp
        dp = dp * x + p
        p = p * x + coeff
    return p, dp, d2p


@lru_cache(maxsize=8)
def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_sum(f, a, b, panels, nodes, weights):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    fx = np.asarray(f(x), dtype=float).reshape(panels, nodes.size)
    return float(np.sum(half * (fx @ weights)))


def quad(f, a: float, b: float, tol: float = 1e-12, order: int = 20,
         max_panels: int = 2**20) -> tuple[float, float]:
    """Integrate a vectorized callable over ``[a, b]``.

    Composite Gauss-Legendre rule; the number of panels is doubled until
    two successive estimates differ by at most ``tol``.

    Parameters
    ----------
    f : callable
        Accepts and returns numpy arrays. Never evaluated at the endpoints,
        so integrable endpoint singularities are tolerated.
    a, b : float
        Integration limits, ``a < b``.
    tol : float
        Absolute tolerance on the difference of successive estimates.

    Returns
    -------
    value, error_estimate : float
        Last estimate and its difference from the previous level.

    Raises
    ------
    QuadratureError
        When ``max_panels`` is exceeded; carries the best estimate.
    """
    if not a < b:
        raise ValueError(f"quad requires a < b, got a={a}, b={b}")
    nodes, weights = _gauss_legendre(order)
    panels = 2
    prev = _panel_sum(f, a, b, panels, nodes, weights)
    while True:
        panels *= 2
        cur = _panel_sum(f, a, b, panels, nodes, weights)
        err = abs(cur - prev)
        if not np.isfinite(cur):
            raise QuadratureError("integrand produced a non-finite value", cur, err)
        if err <= tol:
            return cur, err
        if panels >= max_panels:
            raise QuadratureError(
                f"no convergence with {panels} panels (difference {err:.3e} > {tol:.1e})",
                cur, err)
        prev = cur


def count_nodes(f, a: float, b: float, samples: int = 10_000) -> int:
    """Count strict sign changes of ``f`` on a uniform grid strictly inside ``(a, b)``.

    Samples with ``|f| < 1e-13 * max|f|`` are dropped before counting, and
    the result does not depend on positive rescaling of ``f``.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    x = np.linspace(a, b, samples + 2)[1:-1]
    y = np.asarray(f(x), dtype=float)
    scale = np.max(np.abs(y))
    if scale == 0.0:
        return 0
    y = y[np.abs(y) >= 1e-13 * scale]
    return int(np.count_nonzero(np.signbit(y[1:]) != np.signbit(y[:-1])))
