"""Constitutive laws and pointwise formulas for planar compressible MHD.

All functions accept scalars or numpy arrays and raise ``DomainError`` when a
positivity precondition is violated.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of a constitutive law."""


@dataclass(frozen=True)
class Parameters:
    """Physical and constitutive constants.

    ``lambda_w`` is the transverse-velocity viscosity, ``nu_b`` the magnetic
    diffusivity, ``mu1``/``mu2``/``alpha`` define ``mu = mu1 + mu2 v**-alpha``
    and ``kappa0``/``beta`` define ``kappa = kappa0 theta**beta``.
    """

    R: float = 1.0
    c_v: float = 1.0
    lambda_w: float = 1.0
    nu_b: float = 1.0
    mu1: float = 1.0
    mu2: float = 0.0
    alpha: float = 0.0
    beta: float = 1.0
    kappa0: float = 1.0
    e_const: float = 0.0

    def __post_init__(self) -> None:
        positive = ("R", "c_v", "lambda_w", "nu_b", "mu1", "kappa0")
        nonneg = ("mu2", "alpha", "beta")
        for name in positive:
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"parameter {name} must be > 0, got {value!r}")
        for name in nonneg:
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"parameter {name} must be >= 0, got {value!r}")
        if not np.isfinite(self.e_const):
            raise ValueError("parameter e_const must be finite")

    @classmethod
    def paper_normalized(cls, alpha: float, beta: float) -> "Parameters":
        """Unit constants with ``mu2 = alpha`` and zero energy offset."""
        return cls(
            R=1.0, c_v=1.0, lambda_w=1.0, nu_b=1.0, mu1=1.0,
            mu2=float(alpha), alpha=float(alpha), beta=float(beta),
            kappa0=1.0, e_const=0.0,
        )

    @property
    def gamma(self) -> float:
        return 1.0 + self.R / self.c_v

    @property
    def is_normalized(self) -> bool:
        """True when the momentum equation has the unit-constant form
        ``mu = 1 + alpha v**-alpha`` with ``R = 1`` used by the
        specific-volume representation."""
        return self.R == 1.0 and self.mu1 == 1.0 and self.mu2 == self.alpha

    def to_dict(self) -> dict:
        return asdict(self)


def _require_positive(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"{name} must be strictly positive")
    return arr


def _out(arr: np.ndarray):
    return arr.item() if arr.ndim == 0 else arr


def pressure(v, theta, params: Parameters):
    """Perfect-gas pressure ``R theta / v``."""
    v = _require_positive("v", v)
    theta = _require_positive("theta", theta)
    return _out(params.R * theta / v)


def viscosity(v, params: Parameters):
    """Density-dependent viscosity ``mu1 + mu2 v**-alpha``."""
    v = _require_positive("v", v)
    return _out(params.mu1 + params.mu2 * v ** (-params.alpha))


def conductivity(theta, params: Parameters):
    """Degenerate heat conductivity ``kappa0 theta**beta``."""
    theta = _require_positive("theta", theta)
    return _out(params.kappa0 * theta**params.beta)


def internal_energy(theta, params: Parameters):
    theta = _require_positive("theta", theta)
    return _out(params.c_v * theta + params.e_const)


def f_alpha(s, alpha: float):
    """``alpha s**(1-alpha) / (1-alpha)``, or ``ln s`` when ``alpha == 1``.

    The logarithmic branch is taken only on exact equality; values of
    ``alpha`` near one use the power branch.
    """
    s = _require_positive("s", s)
    if alpha == 1:
        return _out(np.log(s))
    return _out(alpha / (1.0 - alpha) * s ** (1.0 - alpha))
