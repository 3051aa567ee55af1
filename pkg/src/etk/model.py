"""Shared domain types: system description, quantum numbers, ET solutions.

Natural units throughout (hbar = c = 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

if TYPE_CHECKING:
    from etk.potentials import KinematicsSpec, PotentialSpec


class ETKError(Exception):
    """Base class for all solver errors."""


class InvalidSystemError(ETKError, ValueError):
    pass


class ParameterError(ETKError, ValueError):
    pass


class DomainError(ETKError, ValueError):
    pass


class NoBoundStateError(ETKError):
    pass


class UnsupportedImprovementError(ETKError):
    pass


class ImprovementUndefinedError(ETKError):
    pass


class VariationalCharacter(enum.Enum):
    UPPER_BOUND = "UpperBound"
    LOWER_BOUND = "LowerBound"
    EXACT = "Exact"
    UNDEFINED = "Undefined"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class QuantumNumbers:
    """Radial/orbital quantum numbers (n, l) for each of the N-1 Jacobi coordinates."""

    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(n), int(l)) for n, l in self.pairs)
        if not pairs:
            raise InvalidSystemError("at least one (n, l) pair is required")
        for n, l in pairs:
            if n < 0 or l < 0:
                raise InvalidSystemError(f"quantum numbers must be non-negative, got ({n}, {l})")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def bgs(cls, N: int) -> "QuantumNumbers":
        """Bosonic ground state: every n and l equal to zero."""
        if N < 2:
            raise InvalidSystemError(f"N must be >= 2, got {N}")
        return cls(((0, 0),) * (N - 1))

    @classmethod
    def parse(cls, text: str) -> "QuantumNumbers":
        """Parse ``"n,l;n,l;..."``."""
        try:
            pairs = [tuple(int(v) for v in chunk.split(",")) for chunk in text.split(";") if chunk.strip()]
        except ValueError as exc:
            raise InvalidSystemError(f"malformed quantum numbers {text!r}") from exc
        if any(len(p) != 2 for p in pairs):
            raise InvalidSystemError(f"malformed quantum numbers {text!r}")
        return cls(tuple(pairs))

    @property
    def n_particles(self) -> int:
        return len(self.pairs) + 1

    def is_bgs(self) -> bool:
        return all(n == 0 and l == 0 for n, l in self.pairs)


@dataclass(frozen=True)
class SystemSpec:
    N: int
    m: float
    D: int
    potential: "PotentialSpec"
    kinematics: Optional["KinematicsSpec"] = None
    state: Optional[QuantumNumbers] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InvalidSystemError(f"N must be an integer >= 2, got {self.N}")
        if not self.m > 0:
            raise InvalidSystemError(f"mass must be positive, got {self.m}")
        if int(self.D) != self.D or self.D < 1:
            raise InvalidSystemError(f"D must be an integer >= 1, got {self.D}")
        if self.kinematics is None:
            from etk.potentials import nonrel

            object.__setattr__(self, "kinematics", nonrel(self.m))
        state = self.state if self.state is not None else QuantumNumbers.bgs(self.N)
        if len(state.pairs) != self.N - 1:
            raise InvalidSystemError(
                f"state needs exactly N-1 = {self.N - 1} (n, l) pairs, got {len(state.pairs)}"
            )
        if self.D == 1 and any(l != 0 for _, l in state.pairs):
            raise InvalidSystemError("orbital quantum numbers must vanish at D=1")
        object.__setattr__(self, "state", state)

    @property
    def n_pairs(self) -> int:
        return pair_count(self.N)


def pair_count(N: int) -> int:
    """Number of particle pairs, N(N-1)/2."""
    if N < 2:
        raise InvalidSystemError(f"N must be >= 2, got {N}")
    return N * (N - 1) // 2


def global_Q(state: QuantumNumbers, D: int, phi: float = 2.0) -> float:
    """Global quantum number Q_phi; phi=2 gives the classical value.

    At D=1 only the classical form sum(n + 1/2) exists, so any phi != 2 is refused.
    """
    if not phi > 0:
        raise ParameterError(f"phi must be positive, got {phi}")
    if D == 1:
        if phi != 2.0:
            raise UnsupportedImprovementError("improvement unavailable at D=1")
        if any(l != 0 for _, l in state.pairs):
            raise InvalidSystemError("orbital quantum numbers must vanish at D=1")
        return sum(n + 0.5 for n, _ in state.pairs)
    if D < 1:
        raise InvalidSystemError(f"D must be >= 1, got {D}")
    return sum(phi * n + l + (D + phi - 2) / 2 for n, l in state.pairs)


def orbital_lambda(state: QuantumNumbers, D: int) -> float:
    """Orbital-only aggregate sum(l + (D-2)/2) entering the DOSM point."""
    if D < 2:
        raise UnsupportedImprovementError("improvement unavailable at D=1")
    return sum(l + (D - 2) / 2 for _, l in state.pairs)


@dataclass(frozen=True)
class EnvelopeSolution:
    energy: float
    p0: float
    rho0: float
    Q_used: float
    phi_used: float
    character: VariationalCharacter
    root_count: int
    system: Optional[SystemSpec] = field(default=None, repr=False, compare=False)

    @property
    def r0(self) -> float:
        """Legacy scale r0 = sqrt(C_N^2) * rho0."""
        return math.sqrt(pair_count(self.system.N)) * self.rho0 if self.system else math.nan

    def residuals(self) -> Tuple[float, float, float]:
        """Relative residuals of the energy, force-balance and quantisation equations."""
        spec = self.system
        if spec is None:
            raise ValueError("solution carries no system; residuals unavailable")
        N, C = spec.N, pair_count(spec.N)
        kin, pot = spec.kinematics, spec.potential
        e_terms = (N * kin.eval(self.p0), C * pot.eval(self.rho0))
        r_energy = abs(self.energy - sum(e_terms)) / max(abs(t) for t in e_terms + (self.energy,))
        lhs = N * kin.deriv1(self.p0) * self.p0
        rhs = C * pot.deriv1(self.rho0) * self.rho0
        r_force = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
        r_quant = abs(math.sqrt(C) * self.p0 * self.rho0 - self.Q_used) / self.Q_used
        return float(r_energy), float(r_force), float(r_quant)


def relative_error(e_approx: float, e_exact: float) -> float:
    if e_exact == 0:
        raise ZeroDivisionError("relative error undefined for a zero reference")
    return abs(e_approx - e_exact) / abs(e_exact)


def as_state(N: int, selector: "str | QuantumNumbers | Sequence | None") -> QuantumNumbers:
    if selector is None or (isinstance(selector, str) and selector.strip().lower() == "bgs"):
        return QuantumNumbers.bgs(N)
    if isinstance(selector, QuantumNumbers):
        return selector
    if isinstance(selector, str):
        return QuantumNumbers.parse(selector)
    return QuantumNumbers(tuple(tuple(p) for p in selector))
