"""Orlicz generator, sub-Gaussian norm helpers, and decision thresholds.

The generator is the power family: phi(t) = |t|^gamma / gamma for
1 < gamma <= 2, switching to the piecewise form (t^2/gamma inside the unit
interval, |t|^gamma/gamma outside) for gamma > 2 so phi stays quadratic near
the origin. Its convex conjugate has exponent beta = gamma/(gamma - 1); the
reliability threshold below is expressed through beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, UnsupportedRegimeError


@dataclass(frozen=True)
class OrliczSpec:
    """Power-family generator parameter gamma > 1."""

    gamma: float = 2.0

    def __post_init__(self) -> None:
        if not (self.gamma > 1.0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must be a finite number > 1, got {self.gamma}")

    @property
    def beta(self) -> float:
        """Conjugate exponent gamma/(gamma - 1)."""
        return self.gamma / (self.gamma - 1.0)

    @property
    def piecewise(self) -> bool:
        """True when the generator uses the quadratic core (gamma > 2)."""
        return self.gamma > 2.0


@dataclass(frozen=True)
class TailBoundSpec:
    """Geometric coefficient envelope: scale tau > 0, ratio 0 < w < 1."""

    tau: float
    w: float

    def __post_init__(self) -> None:
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise DomainError(f"tau must be a finite number > 0, got {self.tau}")
        if not (0.0 < self.w < 1.0):
            raise DomainError(f"w must lie strictly inside (0, 1), got {self.w}")


def phi(t: float, spec: OrliczSpec) -> float:
    """Generator value at t."""
    a = abs(t)
    g = spec.gamma
    if spec.piecewise and a < 1.0:
        return a * a / g
    return a**g / g


def phi_inverse(y: float, spec: OrliczSpec) -> float:
    """Inverse of the generator on t >= 0.

    Raises:
        DomainError: if y < 0.
    """
    if y < 0.0:
        raise DomainError(f"phi_inverse needs y >= 0, got {y}")
    g = spec.gamma
    if spec.piecewise:
        r = math.sqrt(g * y)
        return r if r < 1.0 else (g * y) ** (1.0 / g)
    return (g * y) ** (1.0 / g)


def tau_phi_gaussian(sigma: float, spec: OrliczSpec) -> float:
    """phi-sub-Gaussian norm of a centered Gaussian with deviation sigma.

    Only the quadratic generator admits the closed form (the norm equals
    sigma); other gamma values have no closed form here.

    Raises:
        UnsupportedRegimeError: if gamma != 2.
        DomainError: if sigma < 0.
    """
    if sigma < 0.0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if spec.gamma != 2.0:
        raise UnsupportedRegimeError(
            f"closed-form Gaussian norm is only available for gamma = 2, got gamma = {spec.gamma}"
        )
    return sigma


def threshold_reliability(delta: float, alpha: float, spec: OrliczSpec, p: float) -> float:
    """Largest admissible tail constant for accuracy delta at level alpha.

    Computes delta / (beta * ln(2/alpha))^{p/beta}; the model's tail
    constant must not exceed this for the certified deviation probability
    to stay below alpha.

    Raises:
        DomainError: if delta <= 0, alpha outside (0, 2), or p < 1.
    """
    _check_delta_p(delta, p)
    if not (0.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    b = spec.beta
    return delta / (b * math.log(2.0 / alpha)) ** (p / b)


def threshold_accuracy(delta: float, p: float, spec: OrliczSpec) -> float:
    """Strict upper bound on the tail constant for mean L_p accuracy delta.

    Computes delta / p^{p (1 - 1/gamma)}.

    Raises:
        DomainError: if delta <= 0 or p < 1.
    """
    _check_delta_p(delta, p)
    return delta / p ** (p * (1.0 - 1.0 / spec.gamma))


def _check_delta_p(delta: float, p: float) -> None:
    if not (delta > 0.0 and math.isfinite(delta)):
        raise DomainError(f"delta must be a finite number > 0, got {delta}")
    if not (p >= 1.0 and math.isfinite(p)):
        raise DomainError(f"p must be a finite number >= 1, got {p}")
