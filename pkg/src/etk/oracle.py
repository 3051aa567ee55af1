"""Correlated-Gaussian variational reference for three identical bosons in 3D.

Trial functions are exp(-(a x^2 + b y^2)/2) on the Jacobi coordinates
x = r1 - r2, y = (r1 + r2)/2 - r3, symmetrized over particle permutations.
Widths form a geometric a x b grid scaled by the classical ET radius.  The
grid is refined by extending the width range, mainly toward large widths
where singular potentials need resolution; each refinement contains the
previous basis, so the energy can only go down (up to the tiny overlap
directions discarded below).

Near linear dependence of the overcomplete Gaussian set is removed by
canonical orthogonalization: overlap eigen-directions below lambda_max/cond_cap
are dropped before the dense eigen-solve.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from etk.model import (  # noqa: F401  (relative_error re-exported)
    NoBoundStateError,
    ParameterError,
    SystemSpec,
    relative_error,
)
from etk.potentials import PotentialSpec

# Jacobi map from particle positions; pair vectors w satisfy r_i - r_j = w . (x, y)
_J = np.array([[1.0, -1.0, 0.0], [0.5, 0.5, -1.0]])
_J_PINV = np.linalg.pinv(_J)
PAIR_VECTORS = np.array([[1.0, 0.0], [0.5, 1.0], [-0.5, 1.0]])

CAUTION_BETA = -1.6


def permutation_transform(perm: Sequence[int]) -> np.ndarray:
    """2x2 action of a particle permutation on the Jacobi coordinates."""
    P = np.eye(3)[list(perm)]
    T = _J @ P @ _J_PINV
    return np.round(T * 4) / 4  # entries are exact multiples of 1/4


_ALL_PERMS = list(itertools.permutations(range(3)))
_CYCLIC = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]


@dataclass(frozen=True)
class GaussianBasisConfig:
    """Width grid and refinement controls.

    a_min, a_max are in units of 1/rho0^2, rho0 being the classical ET radius.
    Each refinement step adds ``grow`` widths above the top of each axis and
    ``grow_low`` below the bottom, at the same geometric ratio.  ``cond_cap``
    is the relative overlap eigenvalue cut.
    """

    n_a: int = 17
    n_b: int = 17
    a_min: float = 1e-2
    a_max: float = 1e2
    tol_rel: float = 1e-7
    cond_cap: float = 1e12
    grow: int = 4
    grow_low: int = 0
    max_steps: int = 4

    def __post_init__(self):
        if not (self.a_min > 0 and self.a_max > self.a_min):
            raise ParameterError("need 0 < a_min < a_max")
        if self.n_a < 2 or self.n_b < 2 or self.n_a * self.n_b < 4:
            raise ParameterError("need n_a, n_b >= 2")
        if not self.tol_rel > 0:
            raise ParameterError("tol_rel must be positive")
        if not self.cond_cap > 1:
            raise ParameterError("cond_cap must exceed 1")
        if self.grow < 1 or self.grow_low < 0 or self.max_steps < 0:
            raise ParameterError("need grow >= 1, grow_low >= 0 and max_steps >= 0")


@dataclass(frozen=True)
class OracleResult:
    energy: float
    basis_size: int
    converged: bool
    delta_last: float
    history: Tuple[float, ...] = ()
    cond: float = math.nan
    scale: float = 1.0
    notes: Tuple[str, ...] = field(default=(), compare=False)


# --- pair averages by quadrature -------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_S_MIN, _S_MAX = 1e-16, 9.5


def _log_panel_rule(panels: int):
    t = np.linspace(math.log(_S_MIN), math.log(_S_MAX), panels + 1)
    h = np.diff(t) / 2
    mid = (t[1:] + t[:-1]) / 2
    nodes = (mid[:, None] + h[:, None] * _GL_X[None, :]).ravel()
    weights = (h[:, None] * _GL_W[None, :]).ravel()
    s = np.exp(nodes)
    # ds = s dt; density in s = r sqrt(c) is (4/sqrt(pi)) s^2 exp(-s^2)
    return s, weights * s**3 * np.exp(-s * s) * (4 / math.sqrt(math.pi))


def quadrature_pair_average(V: Callable, c, rtol: float = 1e-13, chunk: int = 4096) -> np.ndarray:
    """<V(r)> under the radial density 4 pi r^2 (c/pi)^{3/2} exp(-c r^2).

    Composite Gauss-Legendre in log(r sqrt(c)); the panel count is doubled
    until two successive rules agree to ``rtol``.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    out = np.empty_like(c)
    for lo in range(0, c.size, chunk):
        cc = c[lo : lo + chunk]
        inv = 1 / np.sqrt(cc)
        prev = None
        for panels in (16, 32, 64, 128, 256):
            s, w = _log_panel_rule(panels)
            with np.errstate(all="ignore"):
                vals = V(np.outer(inv, s))
            cur = vals @ w
            if prev is not None:
                err = np.abs(cur - prev)
                scale = np.maximum(np.abs(cur), (np.abs(vals) @ w))
                if np.all(err <= rtol * scale):
                    break
            prev = cur
        out[lo : lo + chunk] = cur
    return out.reshape(np.shape(c)) if np.ndim(c) else out


def _pair_average(pot: PotentialSpec, force_quadrature: bool) -> Callable:
    if pot.pair_average is not None and not force_quadrature:
        return lambda c: np.asarray(pot.pair_average(c), dtype=float)
    return lambda c: quadrature_pair_average(pot.eval, c)


# --- matrix elements -------------------------------------------------------------


def _congruence(T: np.ndarray, a00, a01, a11):
    """Components of T^T A T for symmetric A given by (a00, a01, a11)."""
    t00, t01, t10, t11 = T[0, 0], T[0, 1], T[1, 0], T[1, 1]
    b00 = t00 * t00 * a00 + 2 * t00 * t10 * a01 + t10 * t10 * a11
    b11 = t01 * t01 * a00 + 2 * t01 * t11 * a01 + t11 * t11 * a11
    b01 = t00 * t01 * a00 + (t00 * t11 + t10 * t01) * a01 + t10 * t11 * a11
    return b00, b01, b11


def _adj_quadratic(w: np.ndarray, a00, a01, a11):
    """w^T adj(A) w; positive for positive-definite A."""
    return w[0] * w[0] * a11 - 2 * w[0] * w[1] * a01 + w[1] * w[1] * a00


def _pair_elements(Ai, Aj, perms, m: float, avg: Callable):
    """Unnormalized (S, H) for basis pairs (i, j) summed over ``perms`` acting on j."""
    a00, a01, a11 = Ai
    detA = a00 * a11 - a01 * a01
    lam0, lam1 = 2.0 / m, 1.5 / m
    trLA = lam0 * a00 + lam1 * a11
    S = np.zeros_like(a00)
    H = np.zeros_like(a00)
    for perm in perms:
        T = permutation_transform(perm)
        b00, b01, b11 = _congruence(T, *Aj)
        detB = Aj[0] * Aj[2] - Aj[1] * Aj[1]  # |det T| = 1
        mixed = a00 * b11 + a11 * b00 - 2 * a01 * b01
        detC = detA + detB + mixed
        s = detC**-1.5
        # (A^-1 + B^-1)^-1 = (det B A + det A B) / det C
        kin = 1.5 * (detB * trLA + detA * (lam0 * b00 + lam1 * b11)) / detC
        pot = np.zeros_like(a00)
        for w in PAIR_VECTORS:
            q = _adj_quadratic(w, a00, a01, a11) + _adj_quadratic(w, b00, b01, b11)
            pot += avg(detC / (2 * q))
        S += s
        H += s * (kin + pot)
    return S, H


def build_matrices(
    spec: SystemSpec,
    widths_a: np.ndarray,
    widths_b: np.ndarray,
    *,
    labeling: Sequence[int] = (0, 1, 2),
    force_quadrature: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """Normalized overlap and Hamiltonian on the product grid (a outer, b inner)."""
    a = np.repeat(np.asarray(widths_a, float), len(widths_b))
    b = np.tile(np.asarray(widths_b, float), len(widths_a))
    zero = np.zeros_like(a)
    if tuple(labeling) == (0, 1, 2):
        A = (a, zero, b)
        # the 1<->2 swap leaves diagonal Gaussians invariant, so cyclic perms suffice
        perms = _CYCLIC
    else:
        A = _congruence(permutation_transform(labeling), a, zero, b)
        perms = _ALL_PERMS
    n = a.size
    iu, ju = np.triu_indices(n)
    avg = _pair_average(spec.potential, force_quadrature)
    Sv, Hv = _pair_elements(
        tuple(x[iu] for x in A), tuple(x[ju] for x in A), perms, spec.m, avg
    )
    S = np.zeros((n, n))
    H = np.zeros((n, n))
    S[iu, ju] = Sv
    H[iu, ju] = Hv
    S[ju, iu] = Sv
    H[ju, iu] = Hv
    d = 1 / np.sqrt(np.diag(S).copy())
    return S * np.outer(d, d), H * np.outer(d, d)


# --- eigen solve -----------------------------------------------------------------


def canonical_ground_energy(S: np.ndarray, H: np.ndarray, cond_cap: float):
    """Lowest generalized eigenvalue after canonical orthogonalization.

    Overlap eigenvectors with eigenvalue below lambda_max / cond_cap are
    discarded, so the retained subspace has condition number <= cond_cap.
    Returns (energy, retained dimension, retained condition number).
    """
    w, U = linalg.eigh(S)
    keep = w > w[-1] / cond_cap
    X = U[:, keep] / np.sqrt(w[keep])
    M = X.T @ H @ X
    M = (M + M.T) / 2
    e0 = linalg.eigh(M, eigvals_only=True, subset_by_index=[0, 0])[0]
    return float(e0), int(keep.sum()), float(w[-1] / w[keep][0])


def _length_scale(spec: SystemSpec) -> float:
    from etk.et_core import solve_compact

    try:
        rho = solve_compact(spec).rho0
    except Exception:  # noqa: BLE001  any ET failure falls back to unit scale
        return 1.0
    return rho if math.isfinite(rho) and rho > 0 else 1.0


def _check_system(spec: SystemSpec):
    if spec.N != 3 or spec.D != 3 or not spec.state.is_bgs():
        raise ParameterError("the oracle handles only N=3, D=3 bosonic ground states")
    if spec.kinematics.name != "nonrel" or spec.kinematics.params.get("m") != spec.m:
        raise ParameterError("the oracle assumes non-relativistic kinematics with the system mass")


def oracle_ground_energy(
    spec: SystemSpec,
    config: Optional[GaussianBasisConfig] = None,
    *,
    labeling: Sequence[int] = (0, 1, 2),
    force_quadrature: bool = False,
) -> OracleResult:
    """Variational ground-state energy of three identical bosons.

    ``history`` holds the raw energy of every refinement step; ``energy`` is
    its minimum (each step is itself a variational bound).  ``labeling``
    relabels the particles before the basis is built, which must not change
    the result.
    """
    _check_system(spec)
    cfg = config or GaussianBasisConfig()
    if sorted(labeling) != [0, 1, 2]:
        raise ParameterError(f"labeling must be a permutation of (0, 1, 2), got {labeling}")
    rho0 = _length_scale(spec)
    qa = (cfg.a_max / cfg.a_min) ** (1 / (cfg.n_a - 1))
    qb = (cfg.a_max / cfg.a_min) ** (1 / (cfg.n_b - 1))
    base = cfg.a_min / rho0**2

    history: List[float] = []
    notes: List[str] = []
    size, cond = 0, math.nan
    converged = False
    for step in range(cfg.max_steps + 1):
        ia = np.arange(-step * cfg.grow_low, cfg.n_a + step * cfg.grow)
        ib = np.arange(-step * cfg.grow_low, cfg.n_b + step * cfg.grow)
        S, H = build_matrices(
            spec, base * qa**ia, base * qb**ib, labeling=labeling, force_quadrature=force_quadrature
        )
        E, size, cond = canonical_ground_energy(S, H, cfg.cond_cap)
        if not math.isfinite(E):
            raise ArithmeticError("oracle eigenvalue is not finite")
        history.append(E)
        if len(history) >= 2 and abs(history[-1] - history[-2]) < cfg.tol_rel * abs(history[-1]):
            converged = True
            break

    energy = min(history)
    delta = abs(history[-1] - history[-2]) if len(history) >= 2 else math.inf
    beta = spec.potential.params.get("beta")
    if spec.potential.singular_exponent is not None and beta is not None and beta <= CAUTION_BETA:
        notes.append("strongly singular power law: slow convergence expected")
    threshold = spec.potential.threshold
    if threshold is not None and energy >= threshold:
        raise NoBoundStateError(
            f"oracle energy {energy:.6g} is not below the continuum threshold {threshold:g}"
        )
    return OracleResult(
        energy=energy,
        basis_size=int(size),
        converged=converged,
        delta_last=float(delta),
        history=tuple(history),
        cond=cond,
        scale=rho0,
        notes=tuple(notes),
    )
