"""Accuracy sweeps of classical and improved ET against the variational oracle.

Each sweep fixes N=3, m=1, D=3 and the bosonic ground state, and for every
grid value records the oracle energy, the classical (phi=2) ET energy and the
improved ET energy with phi from the DOSM construction.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from etk import potentials
from etk.et_core import solve_compact
from etk.improvement import compute_phi, solve_improved
from etk.model import (
    ETKError,
    EnvelopeSolution,
    ParameterError,
    SystemSpec,
    VariationalCharacter,
    relative_error,
)
from etk.oracle import GaussianBasisConfig, OracleResult, oracle_ground_energy
from etk.potentials import PotentialSpec

MIX_FAMILIES = ("cubic-linear", "cubic-log", "cubic-gauss")


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 10)


def default_beta_grid() -> np.ndarray:
    return _grid(-1.5, -0.1, 0.05)


def default_d_grid(family: str) -> np.ndarray:
    return _grid(0.1 if family == "tcoulomb" else 0.0, 5.0, 0.1)


def default_C_grid() -> np.ndarray:
    return _grid(0.0, 1.0, 0.02)


@dataclass
class SweepRow:
    param: float
    E_oracle: float
    oracle_converged: bool
    E_et: float
    E_improved: float
    phi: float
    rho0_et: float
    character: VariationalCharacter
    rel_err_et: float
    rel_err_improved: float
    et_solution: Optional[EnvelopeSolution] = field(default=None, repr=False, compare=False)
    improved_solution: Optional[EnvelopeSolution] = field(default=None, repr=False, compare=False)
    oracle: Optional[OracleResult] = field(default=None, repr=False, compare=False)
    errors: List[str] = field(default_factory=list, compare=False)

    @property
    def signed_error(self) -> float:
        return self.E_et - self.E_oracle


@dataclass
class SweepTable:
    figure: str
    param_name: str
    rows: List[SweepRow]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def solutions(self) -> List[EnvelopeSolution]:
        out = []
        for r in self.rows:
            out.extend(s for s in (r.et_solution, r.improved_solution) if s is not None)
        return out

    def crossings(self) -> List[float]:
        """Parameter values where E_et - E_oracle changes sign (linear interpolation)."""
        pts = [(r.param, r.signed_error) for r in self.rows if math.isfinite(r.signed_error)]
        out = []
        for (p0, e0), (p1, e1) in zip(pts[:-1], pts[1:]):
            if e0 == 0.0:
                out.append(p0)
            elif e0 * e1 < 0:
                out.append(p0 + (p1 - p0) * e0 / (e0 - e1))
        if pts and pts[-1][1] == 0.0:
            out.append(pts[-1][0])
        return out

    def summary(self) -> Dict:
        def extreme(name):
            vals = [(getattr(r, name), r.param) for r in self.rows if math.isfinite(getattr(r, name))]
            if not vals:
                return None
            (vmax, pmax), (vmin, pmin) = max(vals), min(vals)
            return {"max": vmax, "max_at": pmax, "min": vmin, "min_at": pmin}

        return {
            "figure": self.figure,
            "param": self.param_name,
            "points": len(self.rows),
            "oracle_unconverged": [r.param for r in self.rows if not r.oracle_converged],
            "crossings": self.crossings(),
            "rel_err_et": extreme("rel_err_et"),
            "rel_err_improved": extreme("rel_err_improved"),
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, allow_nan=True)


def _spec(pot: PotentialSpec) -> SystemSpec:
    return SystemSpec(N=3, m=1.0, D=3, potential=pot)


def _safe_rel(e, ref) -> float:
    if not (math.isfinite(e) and math.isfinite(ref)) or ref == 0:
        return math.nan
    return relative_error(e, ref)


def evaluate_point(param: float, pot: PotentialSpec, config: Optional[GaussianBasisConfig] = None) -> SweepRow:
    """Oracle, classical ET and improved ET for one potential; failures become NaN plus a message."""
    spec = _spec(pot)
    errors: List[str] = []
    et = imp = orc = None
    phi = math.nan
    try:
        et = solve_compact(spec)
    except ETKError as exc:
        errors.append(f"et: {exc}")
    try:
        phi = compute_phi(spec).phi
        imp = solve_improved(spec, phi)
    except ETKError as exc:
        errors.append(f"improved: {exc}")
    try:
        orc = oracle_ground_energy(spec, config)
    except (ETKError, ArithmeticError) as exc:
        errors.append(f"oracle: {exc}")
    E_or = orc.energy if orc else math.nan
    E_et = et.energy if et else math.nan
    E_imp = imp.energy if imp else math.nan
    character = et.character if et else potentials.classify_character(spec.kinematics, spec.potential)
    return SweepRow(
        param=float(param),
        E_oracle=E_or,
        oracle_converged=bool(orc and orc.converged),
        E_et=E_et,
        E_improved=E_imp,
        phi=phi,
        rho0_et=et.rho0 if et else math.nan,
        character=character,
        rel_err_et=_safe_rel(E_et, E_or),
        rel_err_improved=_safe_rel(E_imp, E_or),
        et_solution=et,
        improved_solution=imp,
        oracle=orc,
        errors=errors,
    )


def worker_count() -> int:
    env = os.environ.get("ETK_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cap))
        except ValueError:
            pass
    return cap


def run_sweep(
    figure: str,
    param_name: str,
    grid: Sequence[float],
    make: Callable[[float], PotentialSpec],
    config: Optional[GaussianBasisConfig] = None,
) -> SweepTable:
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise ParameterError("sweep grid is empty")
    pots = [make(g) for g in grid]  # validate every point before any heavy work
    tasks = list(zip(grid, pots))
    workers = worker_count()
    if workers == 1:
        rows = [evaluate_point(g, p, config) for g, p in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: evaluate_point(t[0], t[1], config), tasks))
    return SweepTable(figure=figure, param_name=param_name, rows=rows)


def sweep_npp(beta_grid: Optional[Sequence[float]] = None, config=None) -> SweepTable:
    grid = default_beta_grid() if beta_grid is None else beta_grid
    for b in grid:
        if not -2 < b < 0:
            raise ParameterError(f"beta must lie in (-2, 0), got {b}")
    return run_sweep("npp", "beta", grid, lambda b: potentials.power(b, G=1.0), config)


def sweep_trunc_coulomb(d_grid: Optional[Sequence[float]] = None, config=None) -> SweepTable:
    grid = default_d_grid("tcoulomb") if d_grid is None else d_grid
    for d in grid:
        if not d > 0:
            raise ParameterError(f"truncated Coulomb needs d > 0, got {d}")
    return run_sweep("tcoulomb", "d", grid, lambda d: potentials.trunc_coulomb(d, c=1.0), config)


def sweep_exciton(d_grid: Optional[Sequence[float]] = None, config=None) -> SweepTable:
    grid = default_d_grid("exciton") if d_grid is None else d_grid
    for d in grid:
        if d < 0:
            raise ParameterError(f"exciton needs d >= 0, got {d}")
    return run_sweep("exciton", "d", grid, lambda d: potentials.exciton(d, c=1.0), config)


def sweep_mix(family: str, C_grid: Optional[Sequence[float]] = None, config=None) -> SweepTable:
    if family not in MIX_FAMILIES:
        raise ParameterError(f"unknown mix family {family!r}; expected one of {MIX_FAMILIES}")
    grid = default_C_grid() if C_grid is None else C_grid
    for C in grid:
        if not 0 <= C <= 1:
            raise ParameterError(f"mixing weight must lie in [0, 1], got {C}")
    beta = 10.0 if family == "cubic-gauss" else 1.0
    return run_sweep(
        family, "C", grid, lambda C: potentials.make_potential(family, C=C, alpha=1.0, beta=beta), config
    )


FIGURES = {
    "npp": sweep_npp,
    "tcoulomb": sweep_trunc_coulomb,
    "exciton": sweep_exciton,
    "cubic-linear": lambda grid=None, config=None: sweep_mix("cubic-linear", grid, config),
    "cubic-log": lambda grid=None, config=None: sweep_mix("cubic-log", grid, config),
    "cubic-gauss": lambda grid=None, config=None: sweep_mix("cubic-gauss", grid, config),
}


def run_figure(figure: str, grid: Optional[Sequence[float]] = None, config=None) -> SweepTable:
    try:
        fn = FIGURES[figure]
    except KeyError:
        raise ParameterError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}") from None
    return fn(grid, config)
