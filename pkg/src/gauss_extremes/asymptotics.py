"""Closed-form and quadrature evaluation of the extreme-value asymptotics.

Covers the normal survival function and its Mills-ratio check, the
first-order Piterbarg tail approximation over rectangles, the domain scaling
functions m1/m2/m and their inversion, the Gumbel-mixture limit laws for
rectangles / general sets / balls, the random-radius tail regimes with their
integral constant, and the variance of the Gumbel mixture functional.

All expectation-type quantities are computed by Gauss-Hermite quadrature
with order escalation; nothing here is Monte Carlo.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import erfc, erfcx, gamma

from .errors import (
    MissingMoment,
    MissingSurvival,
    NonintegrableTail,
    NoRootInRange,
    NotInAsymptoticRegime,
)

__all__ = [
    "survival_psi",
    "mills_ratio_check",
    "classical_pickands",
    "ScalingSpec",
    "tail_rect",
    "scaling_m",
    "threshold_guess",
    "threshold_for_area",
    "Flavor",
    "LimitLawSpec",
    "limit_law",
    "ball_law",
    "RadialCase",
    "RadialSpec",
    "pareto_survival",
    "log_pareto_survival",
    "radial_constant_C",
    "radial_tail",
    "var_gumbel_mix",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def survival_psi(u) -> float:
    """Upper tail P(W > u) of a standard normal, relative error < 1e-12."""
    u = np.asarray(u, dtype=float)
    out = 0.5 * erfc(u / _SQRT2)
    return float(out) if out.ndim == 0 else out


def mills_ratio_check(u: float) -> float:
    """Psi(u) * sqrt(2*pi) * u * exp(u**2/2); lies in (u^2/(1+u^2), 1) for u > 0.

    Uses the scaled complementary error function, so no overflow for large u.
    """
    if u <= 0.0:
        raise ValueError("Mills ratio check requires u > 0")
    return 0.5 * erfcx(u / _SQRT2) * _SQRT_2PI * u


def classical_pickands(alpha: float) -> float:
    """The two Pickands constants known in closed form: H_1 = 1, H_2 = 1/sqrt(pi)."""
    if math.isclose(alpha, 1.0):
        return 1.0
    if math.isclose(alpha, 2.0):
        return 1.0 / _SQRT_PI
    raise ValueError(
        f"no closed form for alpha={alpha}; supply a Monte Carlo estimate instead"
    )


@dataclass(frozen=True)
class ScalingSpec:
    """Exponents and Pickands constants entering the tail and scaling formulas.

    The side split is symmetric: a1(u) = a2(u), so m1(u) = m2(u) = sqrt(m(u)),
    which keeps the product constraint a1*a2 * H1*H2 * u**(2/a1+2/a2) = 1
    exact while bounding the domain aspect ratio.
    """

    alpha1: float
    alpha2: float
    H1: Optional[float] = None
    H2: Optional[float] = None

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            a = getattr(self, name)
            if not 0.0 < a <= 2.0:
                raise ValueError(f"{name} must lie in (0, 2], got {a}")
        if self.H1 is None:
            object.__setattr__(self, "H1", classical_pickands(self.alpha1))
        if self.H2 is None:
            object.__setattr__(self, "H2", classical_pickands(self.alpha2))
        if self.H1 <= 0 or self.H2 <= 0:
            raise ValueError("Pickands constants must be positive")

    @property
    def exponent(self) -> float:
        """Combined power 2/alpha1 + 2/alpha2 multiplying log u in the tail."""
        return 2.0 / self.alpha1 + 2.0 / self.alpha2


def _rect_rate(u: float, spec: ScalingSpec) -> float:
    """H1*H2 * u**(2/a1+2/a2) * Psi(u): unit-rectangle exceedance rate."""
    return spec.H1 * spec.H2 * u ** spec.exponent * survival_psi(u)


def tail_rect(g: float, h: float, u: float, spec: ScalingSpec) -> float:
    """First-order approximation of P(max over [0,g]x[0,h] > u).

    Valid in the asymptotic regime only; raises NotInAsymptoticRegime when
    the formula returns >= 1 (the approximation is meaningless there).
    """
    if g < 0.0 or h < 0.0:
        raise ValueError("rectangle sides must be nonnegative")
    if g == 0.0 or h == 0.0:
        return 0.0
    value = g * h * _rect_rate(u, spec)
    if value >= 1.0:
        raise NotInAsymptoticRegime(
            f"tail approximation {value:.3g} >= 1 at u={u}; increase u"
        )
    return value


def scaling_m(u: float, spec: ScalingSpec) -> tuple[float, float, float]:
    """Scaling functions (m1, m2, m) at level u under the symmetric split.

    m(u) is the reciprocal of the unit-square tail approximation, so
    m(u) * tail_rect(1, 1, u, spec) == 1 to machine precision.
    """
    if u <= 0.0:
        raise ValueError("u must be positive")
    m = 1.0 / _rect_rate(u, spec)
    m1 = math.sqrt(m)
    return m1, m1, m


def threshold_guess(area: float, spec: ScalingSpec) -> float:
    """Two-term log/log-log expansion of the level u solving m(u) = area."""
    if area <= 1.0:
        raise ValueError("area must exceed 1")
    logn = math.log(area)
    k = spec.exponent
    u2 = (
        2.0 * logn
        + (k - 1.0) * math.log(logn)
        + 2.0 * math.log(spec.H1 * spec.H2 * 2.0 ** (k / 2.0) / (2.0 * _SQRT_PI))
    )
    if u2 <= 0.0:
        raise NoRootInRange(f"expansion breaks down for area={area}")
    return math.sqrt(u2)


def threshold_for_area(area: float, spec: ScalingSpec) -> float:
    """Level u with m(u) = area, to relative accuracy 1e-10.

    Safeguarded root finding on the monotone branch u > sqrt(2/a1 + 2/a2),
    seeded by the log/log-log expansion.
    """
    if not math.isfinite(area) or area <= 1.0:
        raise NoRootInRange(f"area must be a finite number > 1, got {area}")
    k = spec.exponent
    u_lo = math.sqrt(k) + 1e-9  # m is strictly increasing beyond sqrt(k)
    _, _, m_lo = scaling_m(u_lo, spec)
    if area <= m_lo:
        raise NoRootInRange(
            f"area {area:.3g} is below the monotone range (m({u_lo:.3g}) = {m_lo:.3g})"
        )

    def f(v: float) -> float:
        return math.log(scaling_m(v, spec)[2]) - math.log(area)

    try:
        u_hi = max(threshold_guess(area, spec) + 1.0, u_lo + 1.0)
    except NoRootInRange:
        u_hi = u_lo + 1.0
    while f(u_hi) < 0.0:
        u_hi *= 2.0
        if u_hi > 1e8:
            raise NoRootInRange(f"no threshold found below u=1e8 for area={area}")
    root = brentq(f, u_lo, u_hi, xtol=1e-13, rtol=8.9e-16)
    return float(root)


class Flavor(enum.Enum):
    """Exponent convention of the Gumbel mixture: 1-D uses -r + sqrt(2r) W,
    2-D uses -2r + 2 sqrt(r) W."""

    ONE_D = "1d"
    TWO_D = "2d"


@dataclass(frozen=True)
class LimitLawSpec:
    """Parameters of the limit law E[exp(-c * exp(V))] with V the mixture exponent."""

    c: float
    r: float
    flavor: Flavor = Flavor.TWO_D

    def __post_init__(self):
        if self.c < 0.0:
            raise ValueError("limiting mass c must be nonnegative")
        if self.r < 0.0:
            raise ValueError("dependence level r must be nonnegative")

    def value(self) -> float:
        return limit_law(self.c, self.r, self.flavor)


_GH_ORDERS = (16, 32, 64, 128, 256)


@lru_cache(maxsize=None)
def _hermgauss(order: int):
    """Gauss-Hermite nodes/weights, optionally memoized on disk.

    If GAUSS_EXTREMES_CACHE names a writable directory, tables are stored
    there and reloaded across processes.
    """
    cache_dir = os.environ.get("GAUSS_EXTREMES_CACHE")
    if cache_dir:
        path = os.path.join(cache_dir, f"hermgauss_{order}.npz")
        try:
            with np.load(path) as dat:
                return dat["x"], dat["w"]
        except (OSError, KeyError):
            pass
    x, w = np.polynomial.hermite.hermgauss(order)
    if cache_dir:
        try:
            os.makedirs(cache_dir, exist_ok=True)
            np.savez(path, x=x, w=w)
        except OSError:
            pass
    return x, w


def _gauss_hermite_expectation(f: Callable[[np.ndarray], np.ndarray],
                               tol: float = 1e-10) -> float:
    """E[f(W)], W standard normal, by Gauss-Hermite with order escalation."""
    prev = None
    for order in _GH_ORDERS:
        x, w = _hermgauss(order)
        val = float(np.sum(w * f(_SQRT2 * x)) / _SQRT_PI)
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
    return prev


def _mixture_params(r: float, flavor: Flavor) -> tuple[float, float]:
    """(mu, sigma) of the Gaussian exponent V = mu + sigma * W."""
    if flavor is Flavor.TWO_D:
        return -2.0 * r, 2.0 * math.sqrt(r)
    return -r, math.sqrt(2.0 * r)


def limit_law(c: float, r: float, flavor: Flavor = Flavor.TWO_D) -> float:
    """E[exp(-c * exp(V))] with V = -2r + 2 sqrt(r) W (2-D) or -r + sqrt(2r) W (1-D).

    Degenerate cases are exact: c = 0 gives 1, r = 0 gives exp(-c).
    """
    if c < 0.0 or r < 0.0:
        raise ValueError("c and r must be nonnegative")
    if c == 0.0:
        return 1.0
    if r == 0.0:
        return math.exp(-c)
    mu, sigma = _mixture_params(r, flavor)

    def f(w):
        with np.errstate(over="ignore"):
            return np.exp(-c * np.exp(mu + sigma * w))

    return _gauss_hermite_expectation(f)


def ball_law(x: float, r: float) -> float:
    """Limit law for a ball of scaled radius x: limit_law(pi * x**2, r)."""
    if x < 0.0:
        raise ValueError("radius must be nonnegative")
    return limit_law(math.pi * x * x, r, Flavor.TWO_D)


class RadialCase(enum.Enum):
    FINITE_SECOND_MOMENT = "finite_second_moment"
    REGULARLY_VARYING = "regularly_varying"
    SLOWLY_VARYING = "slowly_varying"


@dataclass(frozen=True)
class RadialSpec:
    """Distributional regime of the random radius T.

    Conventions: the survival function is P(T > x) = x**(-lam) * ell(x) with
    ell slowly varying in the regularly varying case (lam < 2 required), and
    ``survival`` is the callback P(T > .) used by the regimes that need it.
    """

    case: RadialCase
    ET2: Optional[float] = None
    lam: Optional[float] = None
    survival: Optional[Callable[[float], float]] = None
    r: float = 0.0

    def __post_init__(self):
        if self.case is RadialCase.REGULARLY_VARYING:
            if self.lam is None:
                raise ValueError("regularly varying case needs the index lam")
            if self.lam >= 2.0:
                raise NonintegrableTail(f"index lam={self.lam} must be < 2")
        if self.r < 0.0:
            raise ValueError("dependence level r must be nonnegative")


def pareto_survival(x0: float = 1.0, lam: float = 1.0) -> Callable[[float], float]:
    """Survival function of a Pareto tail: P(T > x) = min(1, (x/x0)**-lam)."""
    if x0 <= 0 or lam <= 0:
        raise ValueError("Pareto parameters must be positive")

    def surv(x: float) -> float:
        return 1.0 if x <= x0 else (x / x0) ** (-lam)

    return surv


def log_pareto_survival(beta: float = 1.0) -> Callable[[float], float]:
    """Slowly varying survival P(T > x) = min(1, log(x)**-beta)."""
    if beta <= 0:
        raise ValueError("beta must be positive")

    def surv(x: float) -> float:
        return 1.0 if x <= math.e else math.log(x) ** (-beta)

    return surv


def radial_constant_C(lam: float, r: float, tol: float = 1e-10) -> float:
    """The integral constant of the regularly varying radial regime:

        C = int_0^inf x**(1-lam) * E[exp(-pi x^2 e^V + V)] dx,
        V = 2 sqrt(r) W - 2r.

    The endpoint singularity x**(1-lam) is removed by x = y**(1/(2-lam)),
    which turns the weight into a constant Jacobian; the inner expectation
    uses Gauss-Hermite, the outer integral adaptive quadrature.
    """
    if lam >= 2.0:
        raise NonintegrableTail(f"index lam={lam} must be < 2 for integrability")
    if r < 0.0:
        raise ValueError("dependence level r must be nonnegative")
    mu, sigma = _mixture_params(r, Flavor.TWO_D)
    power = 1.0 / (2.0 - lam)

    def inner(x: float) -> float:
        def f(w):
            v = mu + sigma * w
            with np.errstate(over="ignore"):
                return np.exp(v - math.pi * x * x * np.exp(v))

        return _gauss_hermite_expectation(f, tol=tol)

    def integrand(y: float) -> float:
        return inner(y ** power)

    val, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-12, epsrel=1e-10,
                            limit=200)
    return power * val


def radial_tail(u: float, spec: RadialSpec, scaling: ScalingSpec) -> float:
    """Leading-order P(sup over the ball of random radius T > u), per regime.

    finite second moment:  pi * E[T^2] * H1*H2 * u**(2/a1+2/a2) * Psi(u)
    regularly varying:     2*pi * C(lam, r) * P(T > sqrt(m(u)))
    slowly varying:        P(T > sqrt(m(u)))
    """
    if u <= 0.0:
        raise ValueError("u must be positive")
    if spec.case is RadialCase.FINITE_SECOND_MOMENT:
        if spec.ET2 is None:
            raise MissingMoment("finite-second-moment regime needs ET2")
        return math.pi * spec.ET2 * _rect_rate(u, scaling)
    if spec.survival is None:
        raise MissingSurvival(f"{spec.case.value} regime needs a survival callback")
    root_m = math.sqrt(scaling_m(u, scaling)[2])
    if spec.case is RadialCase.REGULARLY_VARYING:
        return 2.0 * math.pi * radial_constant_C(spec.lam, spec.r) * spec.survival(root_m)
    return spec.survival(root_m)


def var_gumbel_mix(r: float) -> float:
    """Var(exp(-exp(V_r))) with V_r = 2 sqrt(r) W - 2r; zero iff r = 0."""
    if r < 0.0:
        raise ValueError("dependence level r must be nonnegative")
    if r == 0.0:
        return 0.0
    return limit_law(2.0, r) - limit_law(1.0, r) ** 2


def gamma_reduction_radial_C(lam: float) -> float:
    """Closed form of C at r = 0: 2*pi*C = pi**(lam/2) * Gamma(1 - lam/2)."""
    if lam >= 2.0:
        raise NonintegrableTail(f"index lam={lam} must be < 2")
    return math.pi ** (lam / 2.0) * gamma(1.0 - lam / 2.0) / (2.0 * math.pi)
