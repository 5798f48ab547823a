"""Parameter, profile and error types shared by every module."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class DegenerateParameterError(ValueError):
    """Parameters for which a formula is 0/0 or otherwise undefined."""


class ResourceError(RuntimeError):
    """A requested exact computation exceeds the enumeration cap."""


class Direction(str, enum.Enum):
    COMPETITIVE = "competitive"  # p = 1, bulk drift to the right
    COOPERATIVE = "cooperative"  # p = 0, bulk drift to the left

    @classmethod
    def parse(cls, value: "str | Direction") -> "Direction":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown direction {value!r}") from None


def parse_density(text: "str | Real") -> Fraction | float:
    """Parse ``"p/q"`` or a decimal string into an exact :class:`Fraction`.

    Non-string reals are passed through unchanged (floats stay floats).
    """
    if isinstance(text, (Fraction, int)):
        return Fraction(text)
    if isinstance(text, Real):
        return float(text)
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse density {text!r}") from None
    return value


def logit(rho: float) -> float:
    return math.log(rho) - math.log1p(-rho)


@dataclass(frozen=True)
class Params:
    """Reservoir densities and bulk direction.

    ``rho_minus == rho_plus`` is accepted (equilibrium line) because the exact
    measure and the simulator are defined there; the closed forms reject it.
    The densities may be exact fractions, they are converted to float where
    floating point is needed.
    """

    rho_minus: Real
    rho_plus: Real
    direction: Direction = Direction.COMPETITIVE

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction.parse(self.direction))
        a, b = self.rho_minus, self.rho_plus
        if not (0 < a < 1 and 0 < b < 1):
            raise DomainError(f"densities must lie in (0,1), got {a}, {b}")
        if a > b:
            raise DomainError(f"need rho_minus <= rho_plus, got {a} > {b}")

    @property
    def rm(self) -> float:
        return float(self.rho_minus)

    @property
    def rp(self) -> float:
        return float(self.rho_plus)

    @property
    def is_equilibrium(self) -> bool:
        return self.rho_minus == self.rho_plus

    @property
    def competitive(self) -> bool:
        return self.direction is Direction.COMPETITIVE

    @property
    def phi_minus(self) -> float:
        return logit(self.rm)

    @property
    def phi_plus(self) -> float:
        return logit(self.rp)

    @property
    def phi0(self) -> float:
        return max(abs(self.phi_minus), abs(self.phi_plus))

    @property
    def rho0(self) -> float:
        return 1.0 / (1.0 + math.exp(-self.phi0))

    def require_driven(self) -> None:
        if self.is_equilibrium:
            raise DegenerateParameterError(
                "closed forms need rho_minus < rho_plus; use the equilibrium functions"
            )

    def with_direction(self, direction) -> "Params":
        return Params(self.rho_minus, self.rho_plus, direction)


@dataclass(frozen=True)
class Profile:
    """Piecewise-constant density profile on [-1, 1].

    ``values[i]`` is the density on ``[breakpoints[i], breakpoints[i+1])``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "values", v)
        if x.ndim != 1 or v.ndim != 1 or len(x) != len(v) + 1:
            raise DomainError("need len(breakpoints) == len(values) + 1")
        if x[0] != -1.0 or x[-1] != 1.0 or np.any(np.diff(x) <= 0):
            raise DomainError("breakpoints must increase strictly from -1 to 1")
        if np.any(v < 0) or np.any(v > 1):
            raise DomainError("profile values must lie in [0, 1]")

    @classmethod
    def constant(cls, value: float) -> "Profile":
        return cls(np.array([-1.0, 1.0]), np.array([float(value)]))

    @classmethod
    def step(cls, left: float, right: float, at: float = 0.0) -> "Profile":
        return cls(np.array([-1.0, at, 1.0]), np.array([left, right], dtype=float))

    @classmethod
    def uniform(cls, values) -> "Profile":
        values = np.asarray(values, dtype=float)
        return cls(np.linspace(-1.0, 1.0, len(values) + 1), values)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)
