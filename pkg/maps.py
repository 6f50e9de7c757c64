"""
Map Families Module (映射族模块)

Closed-form unimodal maps used throughout the toolkit:
1. Fractional logistic map Q^a_l(x) = l/Gamma(a+2) * (1 - 2x/(a+2)) * x^(1+a) (flm_eval).
2. Semi-logistic map, the a = 1/2 case written out (semi_logistic_eval).
3. Analytic derivatives (flm_derivative, map_derivative).
4. Comparison families: classic logistic, Ricker, Hassel (map_eval).
5. Compiled scalar callables for hot loops (map_functions) and n-fold composition (flm_iterate_n).

Negative x is a hard DomainError: fractional powers of negatives are undefined over the reals.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import config
from errors import ConfigurationError, DomainError
from specfun import gamma

_FOUR_OVER_THREE_SQRT_PI = 4.0 / (3.0 * math.sqrt(math.pi))


class MapFamily(str, Enum):
    FLM = 'flm'
    CLASSIC_LOGISTIC = 'logistic'
    RICKER = 'ricker'
    HASSEL = 'hassel'


class Parameter(str, Enum):
    LAMBDA = 'lambda'
    ALPHA = 'alpha'


@dataclass(frozen=True)
class MapDomain:
    lower: float
    upper_zero: float


@dataclass(frozen=True)
class MapSpec:
    """Map family plus its parameters; the one value every evaluator consumes."""

    family: MapFamily
    lam: float
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        try:
            family = MapFamily(self.family)
        except ValueError:
            raise ConfigurationError(f"unknown map family '{self.family}'", field='family')
        object.__setattr__(self, 'family', family)

        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ConfigurationError(f"lambda must be a finite value > 0, got {self.lam}", field='lam')

        if family is MapFamily.FLM:
            if not 0.0 <= self.alpha <= config.MAX_ALPHA:
                raise ConfigurationError(f"alpha must lie in [0, {config.MAX_ALPHA}], got {self.alpha}",
                                         field='alpha')
        elif self.alpha != 0.0:
            raise ConfigurationError(f"alpha only applies to the flm family, got {self.alpha}", field='alpha')

        if family in (MapFamily.RICKER, MapFamily.HASSEL):
            if not self.lam > 1.0:
                raise ConfigurationError(f"{family.value} requires lambda > 1, got {self.lam}", field='lam')
            if not (self.beta > 0.0 and math.isfinite(self.beta)):
                raise ConfigurationError(f"{family.value} requires beta > 0, got {self.beta}", field='beta')

    @property
    def domain(self):
        if self.family is MapFamily.FLM:
            return MapDomain(lower=0.0, upper_zero=flm_upper_zero(self.alpha))
        if self.family is MapFamily.CLASSIC_LOGISTIC:
            return MapDomain(lower=0.0, upper_zero=1.0)
        return MapDomain(lower=0.0, upper_zero=math.inf)

    def with_param(self, parameter, value):
        """Copy of this spec with lambda or alpha replaced (re-validated)."""
        parameter = Parameter(parameter)
        if parameter is Parameter.ALPHA:
            if self.family is not MapFamily.FLM:
                raise ConfigurationError(f"an alpha axis requires the flm family, not {self.family.value}",
                                         field='alpha')
            return replace(self, alpha=float(value))
        return replace(self, lam=float(value))


def _check_x(x):
    if not x >= 0.0:
        raise DomainError(f"x must be >= 0, got {x}", field='x')


def _check_alpha(alpha):
    if not alpha >= 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha}", field='alpha')


def logistic_eval(lam, x):
    _check_x(x)
    return lam * x * (1.0 - x)


def ricker_eval(lam, beta, x):
    _check_x(x)
    return lam * x * math.exp(-beta * x)


def hassel_eval(lam, beta, x):
    _check_x(x)
    return lam * x / (1.0 + x) ** beta


def flm_eval(alpha, lam, x):
    """
    Fractional logistic map of order alpha at x >= 0.
    alpha = 0 is the classic logistic map; lam = 0 gives the zero map.
    """
    _check_x(x)
    _check_alpha(alpha)
    if not lam >= 0.0:
        raise DomainError(f"lambda must be >= 0, got {lam}", field='lam')
    if alpha == 0.0:
        return logistic_eval(lam, x)
    return lam / gamma(alpha + 2.0) * (1.0 - 2.0 * x / (alpha + 2.0)) * x ** (1.0 + alpha)


def semi_logistic_eval(lam, x):
    """
    Semi-logistic map (4 lam / (3 sqrt(pi))) * (1 - 4x/5) * x^(3/2), written out
    independently of flm_eval as a check on its algebra.
    """
    _check_x(x)
    return _FOUR_OVER_THREE_SQRT_PI * lam * (1.0 - 4.0 * x / 5.0) * x ** 1.5


def flm_derivative(alpha, lam, x):
    """
    d/dx Q^a_l(x) = l/Gamma(a+2) * ((1+a) x^a - 2 x^(1+a)).

    Equals Q^(a-1)_l(x) for a >= 1; below 1 the same expression is used.
    At x = 0 the one-sided limit is returned: 0 for a > 0, lam for a = 0.
    """
    _check_x(x)
    _check_alpha(alpha)
    if alpha == 0.0:
        return lam * (1.0 - 2.0 * x)
    if x == 0.0:
        return 0.0
    return lam / gamma(alpha + 2.0) * ((1.0 + alpha) * x ** alpha - 2.0 * x ** (1.0 + alpha))


def flm_upper_zero(alpha):
    """Positive zero 1 + alpha/2 of the FLM (the classic zero 1 at alpha = 0)."""
    _check_alpha(alpha)
    return 1.0 + alpha / 2.0


def map_eval(spec, x):
    _check_x(x)
    if spec.family is MapFamily.FLM:
        return flm_eval(spec.alpha, spec.lam, x)
    if spec.family is MapFamily.CLASSIC_LOGISTIC:
        return logistic_eval(spec.lam, x)
    if spec.family is MapFamily.RICKER:
        return ricker_eval(spec.lam, spec.beta, x)
    return hassel_eval(spec.lam, spec.beta, x)


def map_derivative(spec, x):
    _check_x(x)
    lam, beta = spec.lam, spec.beta
    if spec.family is MapFamily.FLM:
        return flm_derivative(spec.alpha, lam, x)
    if spec.family is MapFamily.CLASSIC_LOGISTIC:
        return lam * (1.0 - 2.0 * x)
    if spec.family is MapFamily.RICKER:
        return lam * math.exp(-beta * x) * (1.0 - beta * x)
    return lam * ((1.0 + x) - beta * x) / (1.0 + x) ** (beta + 1.0)


def map_functions(spec):
    """
    Returns (f, df): scalar callables bit-identical to map_eval/map_derivative
    for this spec, with the Gamma prefactor computed once.
    The callers guarantee x >= 0; no domain check is done here.
    """
    lam, beta = spec.lam, spec.beta

    if spec.family is MapFamily.FLM and spec.alpha != 0.0:
        alpha = spec.alpha
        scale = lam / gamma(alpha + 2.0)
        a2 = alpha + 2.0
        a1 = 1.0 + alpha

        def f(x):
            return scale * (1.0 - 2.0 * x / a2) * x ** a1

        def df(x):
            if x == 0.0:
                return 0.0
            return scale * (a1 * x ** alpha - 2.0 * x ** a1)

        return f, df

    if spec.family in (MapFamily.FLM, MapFamily.CLASSIC_LOGISTIC):
        def f(x):
            return lam * x * (1.0 - x)

        def df(x):
            return lam * (1.0 - 2.0 * x)

        return f, df

    if spec.family is MapFamily.RICKER:
        def f(x):
            return lam * x * math.exp(-beta * x)

        def df(x):
            return lam * math.exp(-beta * x) * (1.0 - beta * x)

        return f, df

    def f(x):
        return lam * x / (1.0 + x) ** beta

    def df(x):
        return lam * ((1.0 + x) - beta * x) / (1.0 + x) ** (beta + 1.0)

    return f, df


def flm_iterate_n(alpha, lam, x, n):
    """
    n-fold composition Q(Q(...Q(x))). Returns NaN once an intermediate value
    is negative (the next fractional power would be undefined).
    """
    if n < 1:
        raise ConfigurationError(f"number of iterates must be >= 1, got {n}", field='iterates')
    value = flm_eval(alpha, lam, x)
    for _ in range(n - 1):
        if value < 0.0:
            return math.nan
        value = flm_eval(alpha, lam, value)
    return value
