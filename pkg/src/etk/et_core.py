"""Envelope-theory compact equations.

For a global quantum number Q the equations

    E     = N T(p0) + C V(rho0)
    N T'(p0) p0 = C V'(rho0) rho0
    Q     = sqrt(C) p0 rho0            (C = N(N-1)/2 pairs)

are solved by eliminating p0 and locating every sign change of the
force-balance residual on a logarithmic rho0 scan.  Each root is a stationary
point of E(rho0); the minimal-energy one is returned.

Closed forms exist for the negative power law and the truncated Coulomb
potential and are provided as independent paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from etk.model import (
    DomainError,
    EnvelopeSolution,
    NoBoundStateError,
    ParameterError,
    SystemSpec,
    VariationalCharacter,
    global_Q,
    pair_count,
)
from etk.potentials import classify_character

DEFAULT_BRACKET = (1e-6, 1e6)
DEFAULT_INTERVALS = 600
WIDE_BRACKET = (1e-15, 1e15)
WIDE_INTERVALS = 1500
# last resort for near-singular power laws, where rho0 ~ base**(1/(2+beta)) escapes any moderate range
EXTREME_BRACKET = (1e-100, 1e100)
EXTREME_INTERVALS = 6000
_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class CompactResidual:
    rho: float
    residual: float


@dataclass(frozen=True)
class TruncCoulombAux:
    A: float
    y: float


def compact_residual(spec: SystemSpec, Q: float, rho):
    """N T'(p0) p0 - C V'(rho0) rho0 with p0 = Q / (sqrt(C) rho0)."""
    C = pair_count(spec.N)
    rho = np.asarray(rho, dtype=float)
    p = Q / (math.sqrt(C) * rho)
    with np.errstate(all="ignore"):
        return spec.N * spec.kinematics.deriv1(p) * p - C * spec.potential.deriv1(rho) * rho


def stationary_points(
    spec: SystemSpec,
    Q: float,
    bracket: Tuple[float, float] = DEFAULT_BRACKET,
    intervals: int = DEFAULT_INTERVALS,
) -> List[Tuple[float, float, float]]:
    """All (rho0, p0, E) solving the last two compact equations for a given Q.

    Raises NoBoundStateError when the residual never changes sign.
    """
    if not Q > 0:
        raise ParameterError(f"global quantum number must be positive, got {Q}")
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ParameterError(f"invalid scan bracket {bracket}")
    grid = np.geomspace(lo, hi, intervals + 1)
    res = compact_residual(spec, Q, grid)
    finite = np.isfinite(res)
    if not finite.any():
        raise DomainError(f"compact residual is not finite anywhere on [{lo:g}, {hi:g}]")

    def f(r):
        return float(compact_residual(spec, Q, r))

    roots = []
    idx = np.flatnonzero(finite)
    for i, j in zip(idx[:-1], idx[1:]):
        if j != i + 1:
            continue
        if res[i] == 0.0:
            roots.append(grid[i])
        elif np.sign(res[i]) != np.sign(res[j]):
            roots.append(brentq(f, grid[i], grid[j], xtol=1e-300, rtol=_RTOL, maxiter=500))
    if finite[-1] and res[-1] == 0.0:
        roots.append(grid[-1])
    if not roots:
        raise NoBoundStateError(
            f"no stationary point of the envelope energy for {spec.potential.name} on [{lo:g}, {hi:g}]"
        )
    C = pair_count(spec.N)
    out = []
    for rho in roots:
        p = Q / (math.sqrt(C) * rho)
        E = float(spec.N * spec.kinematics.eval(p) + C * spec.potential.eval(rho))
        out.append((float(rho), float(p), E))
    return out


def scan_roots(spec: SystemSpec, Q: float, bracket=None, intervals=None):
    """stationary_points on the given bracket, or on successively wider default brackets."""
    if bracket is not None:
        return stationary_points(spec, Q, bracket, intervals or DEFAULT_INTERVALS)
    tiers = [
        (DEFAULT_BRACKET, intervals or DEFAULT_INTERVALS),
        (WIDE_BRACKET, WIDE_INTERVALS),
        (EXTREME_BRACKET, EXTREME_INTERVALS),
    ]
    for k, (br, n) in enumerate(tiers):
        try:
            return stationary_points(spec, Q, br, n)
        except (NoBoundStateError, DomainError):
            if k == len(tiers) - 1:
                raise


def _character(spec: SystemSpec, phi: float) -> VariationalCharacter:
    if phi != 2.0:
        return VariationalCharacter.UNDEFINED
    return classify_character(spec.kinematics, spec.potential)


def solve_compact(
    spec: SystemSpec,
    phi: float = 2.0,
    *,
    bracket: Optional[Tuple[float, float]] = None,
    intervals: Optional[int] = None,
) -> EnvelopeSolution:
    """Generic envelope solution built from V' only."""
    Q = global_Q(spec.state, spec.D, phi)
    points = scan_roots(spec, Q, bracket, intervals)
    rho, p, E = min(points, key=lambda t: t[2])
    return EnvelopeSolution(
        energy=E,
        p0=p,
        rho0=rho,
        Q_used=Q,
        phi_used=phi,
        character=_character(spec, phi),
        root_count=len(points),
        system=spec,
    )


def _require_nonrel(spec: SystemSpec):
    kin = spec.kinematics
    if kin.name != "nonrel" or kin.params.get("m") != spec.m:
        raise ParameterError("closed forms assume non-relativistic kinematics with the system mass")


def solve_power_law(spec: SystemSpec, phi: float = 2.0) -> EnvelopeSolution:
    """Closed form for V = -G r^beta, -2 < beta < 0."""
    _require_nonrel(spec)
    pot = spec.potential
    params = pot.params
    beta = params.get("beta")
    if beta is None or "G" not in params or params.get("sign", -1.0) != -1.0:
        if pot.name == "exciton" and params.get("d") == 0.0:
            beta, G = -1.0, params["c"]
        else:
            raise ParameterError("solve_power_law needs an attractive power-law potential -G r^beta")
    else:
        G = params["G"]
    if not -2 < beta < 0:
        raise ParameterError(f"closed form requires -2 < beta < 0, got {beta}")
    N, m = spec.N, spec.m
    C = pair_count(N)
    Q = global_Q(spec.state, spec.D, phi)
    b = abs(beta)
    rho = (N * Q**2 / (m * b * G * C**2)) ** (1 / (2 + beta))
    E = -(2 + beta) * ((G / 2) ** 2 * C ** (2 - beta) * (N * Q**2 / (2 * m * b)) ** beta) ** (1 / (2 + beta))
    return EnvelopeSolution(
        energy=float(E),
        p0=float(Q / (math.sqrt(C) * rho)),
        rho0=float(rho),
        Q_used=Q,
        phi_used=phi,
        character=_character(spec, phi),
        root_count=1,
        system=spec,
    )


def cubic_F(sign: str, Y: float) -> float:
    """Real root of t^3 + 3t - 2Y = 0 (sign 'plus') or t^3 - 3t - 2Y = 0 (sign 'minus', Y >= 1)."""
    if sign in ("plus", "+"):
        return 2.0 * math.sinh(math.asinh(Y) / 3)
    if sign in ("minus", "-"):
        if Y < 1:
            raise DomainError(f"F_minus requires Y >= 1, got {Y}")
        return 2.0 * math.cosh(math.acosh(Y) / 3)
    raise ParameterError(f"sign must be 'plus' or 'minus', got {sign!r}")


def trunc_coulomb_aux(spec: SystemSpec, phi: float = 2.0) -> TruncCoulombAux:
    _require_nonrel(spec)
    c, d = _trunc_params(spec)
    N, m = spec.N, spec.m
    C = pair_count(N)
    Q = global_Q(spec.state, spec.D, phi)
    A = N * Q**2 / (C**2 * m * c * d)
    s = A * (A + 6)
    Y = (2 * A**3 + 18 * A**2 + 27 * A) / (2 * s**1.5)
    y = math.sqrt(s) / 3 * cubic_F("minus", Y) + A / 3
    return TruncCoulombAux(A=A, y=y)


def _trunc_params(spec: SystemSpec) -> Tuple[float, float]:
    pot = spec.potential
    if pot.name != "trunc-coulomb":
        raise ParameterError("truncated Coulomb closed form needs a 'trunc-coulomb' potential")
    c, d = pot.params["c"], pot.params["d"]
    if not c > 0:
        raise ParameterError(f"c must be positive, got {c}")
    if not d > 0:
        raise ParameterError("d <= 0: use the pure Coulomb (power-law) path instead")
    return c, d


def solve_trunc_coulomb(spec: SystemSpec, phi: float = 2.0) -> EnvelopeSolution:
    """Closed form for V = -c/(r + d) through the cubic y^3 = A (y + 1)^2."""
    aux = trunc_coulomb_aux(spec, phi)
    c, d = _trunc_params(spec)
    C = pair_count(spec.N)
    Q = global_Q(spec.state, spec.D, phi)
    y = aux.y
    rho = d * y
    E = -C * (c / d) * (y + 2) / (2 * (y + 1) ** 2)
    return EnvelopeSolution(
        energy=float(E),
        p0=float(Q / (math.sqrt(C) * rho)),
        rho0=float(rho),
        Q_used=Q,
        phi_used=phi,
        character=_character(spec, phi),
        root_count=1,
        system=spec,
    )


def trunc_coulomb_limit_energies(N: int, m: float, c: float, d: float, Q: float) -> Tuple[float, float]:
    """Large-d and small-d asymptotes of the truncated Coulomb energy; d = 0 is allowed."""
    if not c > 0 or d < 0 or not Q > 0:
        raise ParameterError("need c > 0, d >= 0 and Q > 0")
    C = pair_count(N)
    e_large = -C * c / d + 1.5 * (N / C) ** (1 / 3) * (Q**2 * c**2 / (m * d**4)) ** (1 / 3) if d > 0 else -math.inf
    e_small = -(C**3) / N * m * c**2 / (2 * Q**2) + C**4 / N**2 * m**2 * c**3 * d / Q**4
    return float(e_large), float(e_small)


def trunc_coulomb_limits(spec: SystemSpec, phi: float = 2.0) -> Tuple[float, float]:
    """Asymptotic energies (large d, small d) of the truncated Coulomb solution."""
    _require_nonrel(spec)
    c, d = _trunc_params(spec)
    Q = global_Q(spec.state, spec.D, phi)
    return trunc_coulomb_limit_energies(spec.N, spec.m, c, d, Q)
