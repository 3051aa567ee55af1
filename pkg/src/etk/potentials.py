"""Kinematics and pair-potential families with analytic derivatives.

Each family also carries the sign of d^2 b/dy^2 for b(y) = f(sqrt(y)), which
decides whether the envelope result bounds the true energy from above or below,
and (when known in closed form) the pair average under a Gaussian pair density
used by the variational oracle.
"""

from __future__ import annotations

import enum
import inspect
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Mapping, Optional

import numpy as np
from scipy import special

from etk.model import DomainError, NoBoundStateError, ParameterError, VariationalCharacter

Func = Callable[[np.ndarray], np.ndarray]


class Curvature(enum.Enum):
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE = "positive"
    INDEFINITE = "indefinite"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class KinematicsSpec:
    name: str
    eval: Func
    deriv1: Func
    deriv2: Func
    bT_curvature: Curvature
    params: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PotentialSpec:
    """A pair potential V(r) with V', V'' and concavity metadata.

    ``pair_average(c)`` returns the mean of V(r) under the radial density
    4 pi r^2 (c/pi)^{3/2} exp(-c r^2); ``None`` means "use quadrature".
    ``threshold`` is V at infinity for potentials that vanish there (None for
    confining ones); the oracle uses it to detect unbound systems.
    """

    name: str
    eval: Func
    deriv1: Func
    deriv2: Func
    bV_curvature: Curvature
    params: Mapping[str, float] = field(default_factory=dict)
    pair_average: Optional[Func] = None
    threshold: Optional[float] = None
    singular_exponent: Optional[float] = None

    def __call__(self, r):
        return self.eval(r)


def nonrel(m: float = 1.0) -> KinematicsSpec:
    """Non-relativistic kinetic energy p^2 / 2m."""
    if not m > 0:
        raise ParameterError(f"mass must be positive, got {m}")
    return KinematicsSpec(
        name="nonrel",
        eval=lambda p: p * p / (2 * m),
        deriv1=lambda p: p / m,
        deriv2=lambda p: np.full_like(np.asarray(p, dtype=float), 1.0 / m),
        bT_curvature=Curvature.ZERO,
        params={"m": m},
    )


# --- Gaussian pair averages -------------------------------------------------

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _power_average(beta: float) -> Func:
    pref = _TWO_OVER_SQRT_PI * special.gamma((beta + 3) / 2)
    return lambda c: pref * np.asarray(c, dtype=float) ** (-beta / 2)


def _log_average(c):
    return 0.5 * (special.digamma(1.5) - np.log(c))


def _gauss_average(c):
    c = np.asarray(c, dtype=float)
    return (c / (c + 1.0)) ** 1.5


def _radial_prefactor(c):
    return 4 * math.pi * (c / math.pi) ** 1.5


def _exciton_average(d: float) -> Func:
    # int r^2 e^{-c r^2} / sqrt(r^2 + d^2) dr = (d^2/4) e^z (K1(z) - K0(z)),  z = c d^2 / 2
    def avg(c):
        c = np.asarray(c, dtype=float)
        z = c * d * d / 2
        return -_radial_prefactor(c) * (d * d / 4) * (special.k1e(z) - special.k0e(z))

    return avg


_SERIES_SWITCH = 8.0


def _half_line_moment(eps: np.ndarray) -> np.ndarray:
    """int_0^inf s^2 exp(-s^2) / (s + eps) ds for eps > 0."""
    eps = np.asarray(eps, dtype=float)
    out = np.empty_like(eps)
    small = eps < _SERIES_SWITCH
    e = eps[small]
    x = e * e
    # int_0^inf exp(-s^2)/(s+e) ds = sqrt(pi) D(e) - exp(-e^2) Ei(e^2) / 2
    g = math.sqrt(math.pi) * special.dawsn(e) - 0.5 * np.exp(-x) * special.expi(x)
    out[small] = 0.5 - e * math.sqrt(math.pi) / 2 + x * g
    e = eps[~small]
    if e.size:
        # asymptotic series in 1/eps; terms shrink monotonically well past k=40 for eps >= 8
        term = 0.5 * special.gamma(1.5) / e
        total = term.copy()
        for k in range(1, 48):
            term = -term * (special.gamma((3 + k) / 2) / special.gamma((2 + k) / 2)) / e
            total += term
        out[~small] = total
    return out


def _trunc_coulomb_average(c_coef: float, d: float) -> Func:
    def avg(c):
        c = np.asarray(c, dtype=float)
        sc = np.sqrt(c)
        # int r^2 e^{-c r^2}/(r+d) dr = c^{-1} * int s^2 e^{-s^2}/(s + d sqrt(c)) ds
        return -c_coef * _radial_prefactor(c) * _half_line_moment(d * sc) / c

    return avg


# --- families ---------------------------------------------------------------


def power(beta: float, G: float = 1.0, sign: Optional[float] = None) -> PotentialSpec:
    """V = sign * G * r^beta; sign defaults to -1 for beta < 0 and +1 otherwise."""
    if beta == 0:
        raise ParameterError("beta = 0 is a constant potential; use 'log' for the marginal case")
    if beta <= -2:
        raise ParameterError(f"beta must exceed -2 (fall-to-centre), got {beta}")
    if not G > 0:
        raise ParameterError(f"G must be positive, got {G}")
    s = float(sign) if sign is not None else (-1.0 if beta < 0 else 1.0)
    if s not in (-1.0, 1.0):
        raise ParameterError(f"sign must be +1 or -1, got {sign}")
    if s < 0 and beta > 0:
        raise ParameterError("-G r^beta with beta > 0 is unbounded below")
    a = s * G
    b = beta
    curv = _sign_curv(a * (b / 2) * (b / 2 - 1))
    avg = _power_average(b)
    return PotentialSpec(
        name="power",
        eval=lambda r: a * np.power(r, b),
        deriv1=lambda r: a * b * np.power(r, b - 1),
        deriv2=lambda r: a * b * (b - 1) * np.power(r, b - 2),
        bV_curvature=curv,
        params={"G": G, "beta": beta, "sign": s},
        pair_average=lambda c: a * avg(c),
        threshold=0.0 if b < 0 else None,
        singular_exponent=b if b < 0 else None,
    )


def harmonic(a: float = 1.0) -> PotentialSpec:
    return replace(power(2.0, G=a), name="harmonic", params={"a": a})


def linear(beta: float = 1.0) -> PotentialSpec:
    return replace(power(1.0, G=beta), name="linear", params={"beta": beta})


def cubic(alpha: float = 1.0) -> PotentialSpec:
    return replace(power(3.0, G=alpha), name="cubic", params={"alpha": alpha})


def logarithmic(beta: float = 1.0) -> PotentialSpec:
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    return PotentialSpec(
        name="log",
        eval=lambda r: beta * np.log(r),
        deriv1=lambda r: beta / np.asarray(r, dtype=float),
        deriv2=lambda r: -beta / np.asarray(r, dtype=float) ** 2,
        bV_curvature=Curvature.NEGATIVE,
        params={"beta": beta},
        pair_average=lambda c: beta * _log_average(c),
    )


def gaussian(beta: float) -> PotentialSpec:
    """V = -beta exp(-r^2)."""
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    if beta <= 1:
        raise NoBoundStateError(f"Gaussian well depth beta={beta} must exceed 1 for a bound state")
    return PotentialSpec(
        name="gauss",
        eval=lambda r: -beta * np.exp(-np.square(r)),
        deriv1=lambda r: 2 * beta * r * np.exp(-np.square(r)),
        deriv2=lambda r: 2 * beta * (1 - 2 * np.square(r)) * np.exp(-np.square(r)),
        bV_curvature=Curvature.NEGATIVE,
        params={"beta": beta},
        pair_average=lambda c: -beta * _gauss_average(c),
        threshold=0.0,
    )


def trunc_coulomb(d: float, c: float = 1.0) -> PotentialSpec:
    """V = -c / (r + d)."""
    if not c > 0:
        raise ParameterError(f"c must be positive, got {c}")
    if not d > 0:
        raise ParameterError(f"d must be positive for the truncated Coulomb potential, got {d}")
    return PotentialSpec(
        name="trunc-coulomb",
        eval=lambda r: -c / (r + d),
        deriv1=lambda r: c / np.square(r + d),
        deriv2=lambda r: -2 * c / np.power(r + d, 3),
        bV_curvature=Curvature.NEGATIVE,
        params={"c": c, "d": d},
        pair_average=_trunc_coulomb_average(c, d),
        threshold=0.0,
    )


def exciton(d: float, c: float = 1.0) -> PotentialSpec:
    """V = -c / sqrt(r^2 + d^2); d = 0 is the Coulomb potential."""
    if not c > 0:
        raise ParameterError(f"c must be positive, got {c}")
    if d < 0:
        raise ParameterError(f"d must be non-negative, got {d}")
    if d == 0:
        return replace(power(-1.0, G=c), name="exciton", params={"c": c, "d": 0.0})
    d2 = d * d
    return PotentialSpec(
        name="exciton",
        eval=lambda r: -c / np.sqrt(np.square(r) + d2),
        deriv1=lambda r: c * r / np.power(np.square(r) + d2, 1.5),
        deriv2=lambda r: c * (d2 - 2 * np.square(r)) / np.power(np.square(r) + d2, 2.5),
        bV_curvature=Curvature.NEGATIVE,
        params={"c": c, "d": d},
        pair_average=lambda x: c * _exciton_average(d)(x),
        threshold=0.0,
    )


def _blend(name: str, w1: float, p1: PotentialSpec, w2: float, p2: PotentialSpec, params) -> PotentialSpec:
    avg = None
    if p1.pair_average is not None and p2.pair_average is not None:
        avg = lambda c: w1 * p1.pair_average(c) + w2 * p2.pair_average(c)  # noqa: E731
    return PotentialSpec(
        name=name,
        eval=lambda r: w1 * p1.eval(r) + w2 * p2.eval(r),
        deriv1=lambda r: w1 * p1.deriv1(r) + w2 * p2.deriv1(r),
        deriv2=lambda r: w1 * p1.deriv2(r) + w2 * p2.deriv2(r),
        bV_curvature=Curvature.INDEFINITE,
        params=params,
        pair_average=avg,
    )


def _check_blend(C: float):
    if not 0.0 <= C <= 1.0:
        raise ParameterError(f"blend parameter C must lie in [0, 1], got {C}")


def cubic_linear(C: float, alpha: float = 1.0, beta: float = 1.0) -> PotentialSpec:
    """V = alpha C r^3 + beta (1 - C) r."""
    _check_blend(C)
    params = {"alpha": alpha, "beta": beta, "C": C}
    if C == 0.0:
        return replace(linear(beta), name="cubic-linear", params=params)
    if C == 1.0:
        return replace(cubic(alpha), name="cubic-linear", params=params)
    return _blend("cubic-linear", C, cubic(alpha), 1 - C, linear(beta), params)


def cubic_log(C: float, alpha: float = 1.0, beta: float = 1.0) -> PotentialSpec:
    """V = alpha C r^3 + beta (1 - C) ln r."""
    _check_blend(C)
    params = {"alpha": alpha, "beta": beta, "C": C}
    if C == 0.0:
        return replace(logarithmic(beta), name="cubic-log", params=params)
    if C == 1.0:
        return replace(cubic(alpha), name="cubic-log", params=params)
    return _blend("cubic-log", C, cubic(alpha), 1 - C, logarithmic(beta), params)


def cubic_gauss(C: float, alpha: float = 1.0, beta: float = 10.0) -> PotentialSpec:
    """V = alpha C r^3 - beta (1 - C) exp(-r^2)."""
    _check_blend(C)
    params = {"alpha": alpha, "beta": beta, "C": C}
    if C == 0.0:
        return replace(gaussian(beta), name="cubic-gauss", params=params)
    if C == 1.0:
        return replace(cubic(alpha), name="cubic-gauss", params=params)
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    # gaussian() refuses shallow wells; the cubic part confines for C > 0
    well = PotentialSpec(
        name="gauss",
        eval=lambda r: -beta * np.exp(-np.square(r)),
        deriv1=lambda r: 2 * beta * r * np.exp(-np.square(r)),
        deriv2=lambda r: 2 * beta * (1 - 2 * np.square(r)) * np.exp(-np.square(r)),
        bV_curvature=Curvature.NEGATIVE,
        pair_average=lambda c: -beta * _gauss_average(c),
    )
    return _blend("cubic-gauss", C, cubic(alpha), 1 - C, well, params)


# identifier -> (constructor, allowed parameter names)
FAMILIES: Dict[str, tuple] = {
    "power": (lambda beta, G=1.0, sign=None: power(beta, G=G, sign=sign), ("beta", "G", "sign")),
    "harmonic": (harmonic, ("a",)),
    "trunc-coulomb": (lambda d, c=1.0: trunc_coulomb(d, c=c), ("c", "d")),
    "exciton": (lambda d, c=1.0: exciton(d, c=c), ("c", "d")),
    "linear": (linear, ("beta",)),
    "cubic": (cubic, ("alpha",)),
    "log": (logarithmic, ("beta",)),
    "gauss": (gaussian, ("beta",)),
    "cubic-linear": (cubic_linear, ("C", "alpha", "beta")),
    "cubic-log": (cubic_log, ("C", "alpha", "beta")),
    "cubic-gauss": (cubic_gauss, ("C", "alpha", "beta")),
}


def make_potential(family: str, **params) -> PotentialSpec:
    """Build a potential from its string identifier, ignoring ``None`` parameters."""
    try:
        ctor, allowed = FAMILIES[family]
    except KeyError:
        raise ParameterError(f"unknown potential id {family!r}; choose from {', '.join(FAMILIES)}") from None
    given = {k: v for k, v in params.items() if v is not None}
    extra = set(given) - set(allowed)
    if extra:
        raise ParameterError(f"potential {family!r} does not take {', '.join(sorted(extra))}")
    sig = inspect.signature(ctor)
    missing = [n for n, prm in sig.parameters.items() if prm.default is prm.empty and n not in given]
    if missing:
        raise ParameterError(f"potential {family!r} requires {', '.join(missing)}")
    return ctor(**given)


# --- concavity --------------------------------------------------------------


def _sign_curv(x: float) -> Curvature:
    if x > 0:
        return Curvature.POSITIVE
    if x < 0:
        return Curvature.NEGATIVE
    return Curvature.ZERO


def default_y_samples() -> np.ndarray:
    return np.geomspace(1e-3, 1e3, 200) ** 2


def bV_second_derivative(potential: PotentialSpec, y) -> np.ndarray:
    """d^2/dy^2 V(sqrt(y)) = (V''(r) r - V'(r)) / (4 r^3)."""
    r = np.sqrt(np.asarray(y, dtype=float))
    with np.errstate(all="ignore"):
        return (potential.deriv2(r) * r - potential.deriv1(r)) / (4 * r**3)


def bV_curvature_sign(potential: PotentialSpec, y_samples=None) -> Curvature:
    """Sampled sign of d^2 b_V / dy^2 over the given positive y grid."""
    y = default_y_samples() if y_samples is None else np.asarray(y_samples, dtype=float)
    if y.size == 0 or np.any(y <= 0):
        raise DomainError("y samples must be a non-empty set of positive values")
    r = np.sqrt(y)
    with np.errstate(all="ignore"):
        d1 = np.asarray(potential.deriv1(r), dtype=float)
        d2 = np.asarray(potential.deriv2(r), dtype=float)
    if not (np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
        raise DomainError(f"derivatives of {potential.name} are not finite on the sample grid")
    num = d2 * r - d1
    # exact cancellation for pure quadratics; guard the rest against rounding
    scale = np.abs(d2 * r) + np.abs(d1)
    num = np.where(np.abs(num) <= 1e-12 * scale, 0.0, num)
    # weak concavity (zeros mixed in, e.g. from underflow of a decaying tail) keeps the sign
    if np.all(num == 0):
        return Curvature.ZERO
    if np.all(num <= 0):
        return Curvature.NEGATIVE
    if np.all(num >= 0):
        return Curvature.POSITIVE
    return Curvature.INDEFINITE


def _character_of(curv: Curvature) -> VariationalCharacter:
    return {
        Curvature.NEGATIVE: VariationalCharacter.UPPER_BOUND,
        Curvature.POSITIVE: VariationalCharacter.LOWER_BOUND,
        Curvature.ZERO: VariationalCharacter.EXACT,
        Curvature.INDEFINITE: VariationalCharacter.UNDEFINED,
    }[curv]


def classify_character(kin: KinematicsSpec, pot: PotentialSpec) -> VariationalCharacter:
    """Variational character of the classical envelope result.

    Concave b_T and b_V give an upper bound, convex ones a lower bound; a
    vanishing curvature defers to the other function.
    """
    t, v = kin.bT_curvature, pot.bV_curvature
    if t is Curvature.ZERO:
        return _character_of(v)
    if v is Curvature.ZERO:
        return _character_of(t)
    if t is v and t is not Curvature.INDEFINITE:
        return _character_of(t)
    return VariationalCharacter.UNDEFINED
