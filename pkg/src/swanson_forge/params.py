"""The non-Hermiticity pair (alpha, beta) of the generalized Swanson model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EqualParameters, ProductBoundViolated, SumExceedsOne, SwansonError


@dataclass(frozen=True)
class SwansonCouple:
    """Immutable (alpha, beta) pair with its derived scalars.

    ``s = 1 - alpha - beta`` scales energies, ``mu = (alpha - beta)/s`` is the
    gauge exponent and ``r = (1 - 4 alpha beta)/s**2`` weights ``W**2`` in the
    Hermitian-equivalent potential.
    """

    alpha: float
    beta: float
    limit: bool = False
    s: float = field(init=False)
    mu: float = field(init=False)
    r: float = field(init=False)

    def __post_init__(self) -> None:
        s = 1.0 - self.alpha - self.beta
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "mu", (self.alpha - self.beta) / s)
        object.__setattr__(self, "r", (1.0 - 4.0 * self.alpha * self.beta) / s**2)
        assert self.s > 0 and self.r > 0

    @property
    def sqrt_r(self) -> float:
        return math.sqrt(self.r)

    @property
    def sqrt_s(self) -> float:
        return math.sqrt(self.s)

    def swapped(self) -> "SwansonCouple":
        return new_couple(self.beta, self.alpha)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "s": self.s, "mu": self.mu, "r": self.r}


def new_couple(alpha: float, beta: float) -> SwansonCouple:
    """Validate and build a non-Hermitian couple.

    Raises EqualParameters, SumExceedsOne or ProductBoundViolated.
    """
    alpha = float(alpha)
    beta = float(beta)
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise SwansonError(f"alpha and beta must be finite, got ({alpha}, {beta})")
    if alpha == beta:
        raise EqualParameters(f"alpha == beta == {alpha} makes the Hamiltonian Hermitian")
    if alpha + beta >= 1.0:
        raise SumExceedsOne(f"alpha + beta = {alpha + beta:.6g} must be < 1")
    if 4.0 * alpha * beta >= 1.0:
        raise ProductBoundViolated(f"4 alpha beta = {4 * alpha * beta:.6g} must be < 1")
    return SwansonCouple(alpha, beta)


def hermitian_limit() -> SwansonCouple:
    """The alpha = beta = 0 couple used by oracle tests; flagged ``limit=True``."""
    return SwansonCouple(0.0, 0.0, limit=True)


def spectral_weight(couple: SwansonCouple) -> float:
    return couple.r


def physical_energy(couple: SwansonCouple, eps: float) -> float:
    """Map a Schroedinger-frame energy to the Swanson-frame energy ``E = s * eps``."""
    return couple.s * eps
