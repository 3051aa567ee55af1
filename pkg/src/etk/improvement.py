"""phi-improved envelope theory.

phi is computed from the dominantly-orbital-state point: the force balance is
solved with the orbital-only quantum number lambda = sum(l + (D-2)/2) in place
of Q, then the curvature of the effective radial problem around that point
fixes phi.  The improved energy re-solves the compact equations with Q_phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from etk.et_core import scan_roots, solve_compact
from etk.model import (
    EnvelopeSolution,
    ImprovementUndefinedError,
    SystemSpec,
    UnsupportedImprovementError,
    orbital_lambda,
    pair_count,
)


@dataclass(frozen=True)
class PhiReport:
    p_tilde: float
    rho_tilde: float
    mu: float
    k: float
    lam: float
    phi: float


def _require_dimension(spec: SystemSpec):
    if spec.D < 2:
        raise UnsupportedImprovementError("improvement unavailable at D=1")


def solve_dosm_point(spec: SystemSpec) -> Tuple[float, float]:
    """(p_tilde, rho_tilde) from the force balance at sqrt(C) p rho = lambda."""
    _require_dimension(spec)
    lam = orbital_lambda(spec.state, spec.D)
    if not lam > 0:
        raise ImprovementUndefinedError(f"orbital quantum number lambda = {lam} must be positive")
    points = scan_roots(spec, lam)
    rho, p, _ = min(points, key=lambda t: t[2])
    return p, rho


def compute_phi(spec: SystemSpec) -> PhiReport:
    p, rho = solve_dosm_point(spec)
    N = spec.N
    C = pair_count(N)
    kin, pot = spec.kinematics, spec.potential
    t1 = float(kin.deriv1(p))
    t2 = float(kin.deriv2(p))
    mu = p / (N * t1)
    # V'' is taken at rho_tilde; this is the only dimensionally consistent reading
    k = 2 * N * p * t1 / rho**2 + N * p**2 * t2 / rho**2 + C * float(pot.deriv2(rho))
    if not k > 0:
        raise ImprovementUndefinedError(f"effective spring constant k = {k:g} is not positive")
    lam = orbital_lambda(spec.state, spec.D)
    phi = lam / (N * p * t1) * math.sqrt(k / (C * mu))
    return PhiReport(p_tilde=p, rho_tilde=rho, mu=mu, k=k, lam=lam, phi=phi)


def solve_improved(spec: SystemSpec, phi: Optional[float] = None) -> EnvelopeSolution:
    """Second compact-equation solve with Q replaced by Q_phi.

    ``phi`` overrides the DOSM value (e.g. a value fitted to a known level).
    """
    _require_dimension(spec)
    if phi is None:
        phi = compute_phi(spec).phi
    return solve_compact(spec, phi)
