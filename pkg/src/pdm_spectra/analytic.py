"""Closed-form spectrum and eigenfunctions.

The effective potential is of generalized Poschl-Teller type,
``zeta^2/2 [k(k-1)/sin^2 + l(l-1)/cos^2] - zeta^2/2`` on
``0 < q < pi/(2 zeta)``, with ``k(k-1) = l_d(l_d+1)`` and
``l(l-1) = l_d(l_d+1) + 2d``. We take ``k = l_d + 1`` (regular at the
origin) and ``l = (1 + Delta)/2`` with ``Delta = sqrt((2 l_d + 1)^2 + 8d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import specfun
from .model import MassModel, QuantumNumbers

__all__ = [
    "PTParams",
    "BoundState",
    "pt_params",
    "energy",
    "energy_from_params",
    "energy_kappa_zero",
    "phi",
    "radial",
    "radial_derivs",
    "normalize",
    "bound_state",
    "node_count",
    "q_domain",
]


@dataclass(frozen=True)
class PTParams:
    kappa: float
    lam: float
    delta: float
    c: float
    zeta: float
    ell_d: Fraction
    d: int

    @property
    def q_top(self) -> float:
        return math.pi / (2.0 * self.zeta)


def _sqrt_int(n: int) -> float:
    root = math.isqrt(n)
    return float(root) if root * root == n else math.sqrt(n)


def pt_params(qn: QuantumNumbers, zeta: float) -> PTParams:
    """Map quantum numbers to Poschl-Teller parameters ``(kappa, lambda, Delta, c)``.

    The radicand ``(2 l_d + 1)^2 + 8d`` is an integer, so perfect squares
    give an exact ``Delta``.
    """
    ell_d = qn.ell_d
    radicand = (2 * ell_d + 1) ** 2 + 8 * qn.d
    assert radicand.denominator == 1
    delta = _sqrt_int(int(radicand))
    return PTParams(
        kappa=float(ell_d + 1),
        lam=0.5 * (1.0 + delta),
        delta=delta,
        c=float(ell_d + Fraction(3, 2)),
        zeta=float(zeta),
        ell_d=ell_d,
        d=qn.d,
    )


def energy(qn: QuantumNumbers, zeta: float) -> float:
    """Bound-state energy ``zeta^2/2 ((c + Delta/2 + 2 n_r)^2 - 1)``."""
    p = pt_params(qn, 1.0)
    base = 0.5 * ((p.c + 0.5 * p.delta + 2 * qn.n_r) ** 2 - 1.0)
    return zeta * zeta * base


def energy_from_params(params: PTParams, n_r: int) -> float:
    """Poschl-Teller level ``zeta^2/2 (kappa + lambda + 2 n_r)^2`` minus ``zeta^2/2``."""
    z2 = params.zeta**2
    eps = 0.5 * z2 * (params.kappa + params.lam + 2 * n_r) ** 2
    return eps - 0.5 * z2


def energy_kappa_zero(params: PTParams, n_r: int) -> float:
    """Level formula of the kappa = 0 branch, ``2 zeta^2 (n_r + lambda/2)^2 - zeta^2/2``."""
    z2 = params.zeta**2
    return 2.0 * z2 * (n_r + 0.5 * params.lam) ** 2 - 0.5 * z2


def q_domain(params: PTParams) -> tuple[float, float]:
    """Integration domain in q: the half interval, doubled for d = 1 by symmetry."""
    return 0.0, params.q_top


def _hyp_phi(params: PTParams, n_r: int) -> specfun.TerminatingHyp:
    if params.kappa == 0.0:
        return specfun.terminating_hyp(n_r, n_r + params.lam, 0.5)
    return specfun.terminating_hyp(n_r, params.kappa + params.lam + n_r, params.kappa + 0.5)


def phi(params: PTParams, n_r: int, q):
    """Unnormalized eigenfunction of the 1D Poschl-Teller problem.

    ``sin^kappa cos^lambda 2F1(-n, kappa+lambda+n; kappa+1/2; sin^2)``, which
    for ``kappa = 0`` reads ``cos^lambda 2F1(-n, n+lambda; 1/2; sin^2)``.
    """
    arg = params.zeta * np.asarray(q, dtype=float)
    s, c = np.sin(arg), np.cos(arg)
    h = _hyp_phi(params, n_r)
    if params.kappa == 0.0:
        out = np.abs(c) ** params.lam * specfun.hyp_eval(h, s * s)
    else:
        out = np.power(s, params.kappa) * np.abs(c) ** params.lam * specfun.hyp_eval(h, s * s)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BoundState:
    qn: QuantumNumbers
    params: PTParams
    energy: float
    norm_constant: float = 1.0

    @property
    def model(self) -> MassModel:
        return MassModel.lorentzian(self.params.zeta)

    def phi(self, q):
        return self.norm_constant * phi(self.params, self.qn.n_r, q)

    def radial(self, r):
        return radial(self, r)


def _radial_pieces(params: PTParams, n_r: int):
    ell_d = float(params.ell_d)
    power = ell_d + 1.0
    decay = 0.25 * (2.0 * ell_d + 5.0 + params.delta)
    h = specfun.terminating_hyp(n_r, params.c + 0.5 * params.delta + n_r, params.c)
    return power, decay, h


def radial(state: BoundState, r):
    """``C rho^(l_d+1) (1+rho^2)^(-(2 l_d + 5 + Delta)/4) 2F1(-n, c+Delta/2+n; c; rho^2/(1+rho^2))``."""
    p = state.params
    power, decay, h = _radial_pieces(p, state.qn.n_r)
    rho = p.zeta * np.asarray(r, dtype=float)
    u = 1.0 + rho * rho
    pre = 1.0 if power == 0.0 else np.power(rho, power)
    out = state.norm_constant * pre * u ** (-decay) * specfun.hyp_eval(h, rho * rho / u)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def radial_derivs(state: BoundState, r):
    """``R``, ``dR/dr`` and ``d^2R/dr^2`` by term-wise differentiation.

    ``R = C A(rho) B(rho) P(x)`` with ``A = rho^a``, ``B = (1+rho^2)^(-b)``
    and ``x = rho^2/(1+rho^2)``. ``r`` must be nonzero.
    """
    p = state.params
    a, b, h = _radial_pieces(p, state.qn.n_r)
    z = p.zeta
    rho = z * np.asarray(r, dtype=float)
    u = 1.0 + rho * rho
    x = rho * rho / u
    dx = 2.0 * rho / u**2
    d2x = (2.0 - 6.0 * rho * rho) / u**3
    poly, dpoly, d2poly = specfun.hyp_eval_derivs(h, x)
    P = poly
    P1 = dpoly * dx
    P2 = d2poly * dx * dx + dpoly * d2x

    # logarithmic derivatives of A and B with respect to rho
    la1 = a / rho
    la2 = a * (a - 1.0) / (rho * rho)
    lb1 = -2.0 * b * rho / u
    lb2 = lb1 * lb1 - 2.0 * b * (1.0 - rho * rho) / (u * u)

    ab = (1.0 if a == 0.0 else np.power(rho, a)) * u ** (-b)
    C = state.norm_constant
    R = C * ab * P
    R1 = C * ab * (P * (la1 + lb1) + P1)
    R2 = C * ab * (P * (la2 + lb2 + 2.0 * la1 * lb1) + 2.0 * P1 * (la1 + lb1) + P2)
    return R, z * R1, z * z * R2


def _raw_norm(params: PTParams, n_r: int) -> float:
    lo, hi = q_domain(params)
    probe = np.linspace(lo, hi, 257)[1:-1]
    scale = float(np.max(phi(params, n_r, probe) ** 2))
    value, _ = specfun.quad(lambda q: phi(params, n_r, q) ** 2 / scale, lo, hi, tol=1e-14)
    total = value * scale
    return 2.0 * total if params.d == 1 else total


def normalize(state: BoundState) -> BoundState:
    """Fix ``norm_constant`` so that ``int phi^2 dq = int R^2 dr = 1``.

    The integral runs over ``(0, pi/(2 zeta))`` for ``d >= 2`` and over the
    symmetric interval for ``d = 1``.
    """
    total = _raw_norm(state.params, state.qn.n_r)
    return replace(state, norm_constant=1.0 / math.sqrt(total))


def bound_state(qn: QuantumNumbers, zeta: float, normalized: bool = True) -> BoundState:
    params = pt_params(qn, zeta)
    state = BoundState(qn=qn, params=params, energy=energy(qn, zeta))
    return normalize(state) if normalized else state


def node_count(params: PTParams, n_r: int, samples: int = 10_000) -> int:
    """Interior zeros of ``phi`` on ``(0, pi/(2 zeta))``."""
    lo, hi = q_domain(params)
    return specfun.count_nodes(lambda q: phi(params, n_r, q), lo, hi, samples)
