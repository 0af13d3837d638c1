"""Mass profile and quantum-number bookkeeping.

The built-in profile is the squared Lorentzian ``m(r) = 1 / (1 + zeta^2 r^2)^2``. A numeric profile
wraps user callables for ``m``, ``m'`` and ``m''`` and is used only as a
cross-check path through the general transformation formulas.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError, InvalidInputError

__all__ = [
    "Parity",
    "NumericProfile",
    "MassModel",
    "QuantumNumbers",
    "mass_at",
    "ell_d_of",
]


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidInputError(f"parity must be 'even' or 'odd', got {value!r}") from None


@dataclass(frozen=True)
class NumericProfile:
    """User-supplied mass profile with its first two derivatives."""

    m: Callable
    dm: Callable
    d2m: Callable


@dataclass(frozen=True)
class MassModel:
    """Mass profile ``m(r)`` with inverse-length parameter ``zeta``.

    ``numeric`` is ``None`` for the built-in squared-Lorentzian profile.
    """

    zeta: float = 1.0
    numeric: Optional[NumericProfile] = None

    def __post_init__(self):
        if not (np.isfinite(self.zeta) and self.zeta > 0):
            raise InvalidInputError(f"zeta must be a positive finite number, got {self.zeta}")

    @classmethod
    def lorentzian(cls, zeta: float = 1.0) -> "MassModel":
        return cls(zeta=float(zeta))

    @classmethod
    def from_callables(cls, m, dm, d2m, zeta: float = 1.0) -> "MassModel":
        return cls(zeta=float(zeta), numeric=NumericProfile(m, dm, d2m))

    @property
    def is_lorentzian(self) -> bool:
        return self.numeric is None


def mass_at(model: MassModel, r):
    """Return ``(m, m', m'')`` at ``r`` (scalar or array).

    Examples
    --------
    >>> mass_at(MassModel.lorentzian(1.0), 1.0)
    (0.25, -0.5, 1.0)
    """
    if model.is_lorentzian:
        z = model.zeta
        rho = z * np.asarray(r, dtype=float)
        u = 1.0 + rho * rho
        m = 1.0 / (u * u)
        dm = z * (-4.0 * rho / u**3)
        d2m = z * z * (-4.0 / u**3 + 24.0 * rho * rho / u**4)
        if m.ndim == 0:
            return float(m), float(dm), float(d2m)
        return m, dm, d2m
    prof = model.numeric
    try:
        return prof.m(r), prof.dm(r), prof.d2m(r)
    except Exception as exc:
        raise EvaluationError(f"mass profile evaluation failed at r={r!r}: {exc}") from exc


@dataclass(frozen=True)
class QuantumNumbers:
    """Radial quantum number, angular momentum and dimension.

    For ``d == 1`` a parity is mandatory and ``ell`` must be 0; the
    effective angular momentum is then -1 (even) or 0 (odd). For
    ``d >= 2`` parity must be omitted.
    """

    n_r: int
    ell: int
    d: int
    parity: Optional[Parity] = None

    def __post_init__(self):
        for name in ("n_r", "ell", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise InvalidInputError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n_r < 0:
            raise InvalidInputError(f"n_r must be non-negative, got {self.n_r}")
        if self.ell < 0:
            raise InvalidInputError(f"ell must be non-negative, got {self.ell}")
        if self.d < 1:
            raise InvalidInputError(f"d must be at least 1, got {self.d}")
        if self.d == 1:
            if self.parity is None:
                raise InvalidInputError("d = 1 requires an explicit parity (even or odd)")
            object.__setattr__(self, "parity", Parity.parse(self.parity))
            if self.ell != 0:
                raise InvalidInputError(f"d = 1 requires ell = 0, got {self.ell}")
        elif self.parity is not None:
            raise InvalidInputError(f"parity applies only to d = 1 (got d = {self.d})")

    @property
    def ell_d(self) -> Fraction:
        """Effective angular momentum as an exact rational."""
        if self.d == 1:
            return Fraction(-1) if self.parity is Parity.EVEN else Fraction(0)
        return Fraction(2 * self.ell + self.d - 3, 2)

    @property
    def label(self) -> str:
        if self.d == 1:
            return f"n_r={self.n_r}, d=1 {self.parity.value}"
        return f"n_r={self.n_r}, ell={self.ell}, d={self.d}"


def ell_d_of(qn: QuantumNumbers) -> float:
    """``ell + (d - 3)/2`` for ``d >= 2``; -1 or 0 for even/odd ``d == 1``."""
    return float(qn.ell_d)
