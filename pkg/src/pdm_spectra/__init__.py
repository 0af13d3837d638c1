"""Bound states of a quasi-free particle with mass ``1/(1 + zeta^2 r^2)^2`` in d dimensions."""

from .analytic import BoundState, PTParams, bound_state, energy, normalize, phi, pt_params, radial
from .model import MassModel, Parity, QuantumNumbers, ell_d_of, mass_at
from .oracle import EigenReport, residual_eq1, solve_profile, solve_pt
from .pct import PctMap, q_of_r, r_of_q, u_d_closed, u_d_general, v_eff

__version__ = "0.1.0"
