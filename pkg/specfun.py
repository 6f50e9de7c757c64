"""
Special Functions Module (特殊函数模块)

Gamma function and a direct numerical Riemann-Liouville integral, used as an
independent oracle for the closed forms in maps.py:
1. Gamma function (gamma).
2. RL integral of the logistic map (rl_integral_logistic).
3. RL integral of a monomial and its closed form (rl_integral_monomial, rl_monomial_closed_form).
4. Semigroup comparison I^a I^b f vs I^(a+b) f (rl_semigroup_check).

All functions are pure; call them from any number of workers.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

import config
from errors import AccuracyError, ConfigurationError, DomainError
from utils import get_loggers

run_logger, error_logger = get_loggers()

# Lanczos approximation, g = 7, n = 9. Coefficients carry 17 significant
# digits; the series is accurate to ~1e-15 relative for x >= 0.5.
_LANCZOS_G = 7
_LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)

# Gauss-Kronrod 21-point panels per QUADPACK subinterval
_NODES_PER_PANEL = 21


def gamma(x):
    """
    Gamma function for real x > 0.
    Integers use the factorial and half-integers the product from sqrt(pi),
    everything else the Lanczos series (reflection below 1/2).
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"gamma requires a finite x > 0, got {x}", field='x')

    if x.is_integer() and x <= 171.0:
        return float(math.factorial(int(x) - 1))

    if (2.0 * x).is_integer() and x < 30.0:
        result = _SQRT_PI
        k = 0.5
        while k < x:
            result *= k
            k += 1.0
        return result

    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))

    z = x - 1.0
    series = _LANCZOS_COEFFICIENTS[0]
    for i in range(1, _LANCZOS_G + 2):
        series += _LANCZOS_COEFFICIENTS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power so large arguments do not overflow before exp(-t)
    half_power = t ** (0.5 * (z + 0.5))
    return _SQRT_TWO_PI * half_power * (half_power * math.exp(-t)) * series


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for the Riemann-Liouville oracle (lower limit fixed at 0)."""

    node_budget: int = config.QUAD_NODE_BUDGET
    target_rel_error: float = config.QUAD_TARGET_REL_ERROR
    lower_limit: float = 0.0

    def __post_init__(self):
        if isinstance(self.node_budget, bool) or not isinstance(self.node_budget, (int, np.integer)) \
                or self.node_budget < 1:
            raise ConfigurationError(f"node_budget must be a positive integer, got {self.node_budget}",
                                     field='node_budget')
        if not 1e-12 <= self.target_rel_error <= 1e-2:
            raise ConfigurationError(f"target_rel_error must lie in [1e-12, 1e-2], got {self.target_rel_error}",
                                     field='target_rel_error')
        if self.lower_limit != 0.0:
            raise ConfigurationError("only the lower limit 0 is supported", field='lower_limit')

    def check_point(self, alpha, x):
        """Validates the order and evaluation point of one integral."""
        if not 0.0 < alpha <= config.QUAD_MAX_ALPHA:
            raise DomainError(f"order alpha must lie in ]0, {config.QUAD_MAX_ALPHA}], got {alpha}", field='alpha')
        if not x >= self.lower_limit:
            raise DomainError(f"evaluation point must be >= {self.lower_limit}, got {x}", field='x')


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    est_rel_error: float
    nodes_used: int


def _rl_quad(integrand, alpha, x, spec):
    """
    (1/Gamma(alpha)) * integral_0^x f(t) (x-t)^(alpha-1) dt.

    The substitution t = x - u^(1/alpha) turns the kernel into a constant:
    the integral becomes (1/Gamma(alpha+1)) * integral_0^(x^alpha) f(x - u^(1/alpha)) du,
    evaluated with adaptive Gauss-Kronrod (QUADPACK QAGS).
    """
    alpha = float(alpha)
    x = float(x)
    spec.check_point(alpha, x)
    if x == 0.0:
        # empty range, exact
        return QuadratureResult(value=0.0, est_rel_error=0.0, nodes_used=1)

    inv_alpha = 1.0 / alpha

    def substituted(u):
        # u^(1/alpha) may overshoot x by an ulp at the upper end
        return integrand(max(x - u ** inv_alpha, 0.0))

    limit = max(1, (spec.node_budget // _NODES_PER_PANEL + 1) // 2)
    out = quad(substituted, 0.0, x ** alpha, epsabs=0.0, epsrel=spec.target_rel_error,
               limit=limit, full_output=1)
    integral, abserr, info = out[0], out[1], out[2]
    nodes_used = int(info['neval'])

    if integral != 0.0:
        est_rel_error = abserr / abs(integral)
    else:
        est_rel_error = 0.0 if abserr == 0.0 else math.inf

    if len(out) > 3 or est_rel_error > spec.target_rel_error or nodes_used > spec.node_budget:
        reason = out[3].strip().splitlines()[0] if len(out) > 3 else 'target not reached'
        msg = (f"RL quadrature alpha={alpha} x={x}: {reason} "
               f"(est_rel_error={est_rel_error:.3g}, nodes={nodes_used}, budget={spec.node_budget})")
        error_logger.error(msg)
        raise AccuracyError(msg)

    return QuadratureResult(value=integral / gamma(alpha + 1.0),
                            est_rel_error=est_rel_error,
                            nodes_used=nodes_used)


def rl_integral_logistic(alpha, lam, x, spec=None):
    """
    Riemann-Liouville integral of order alpha of f(t) = lam*t*(1-t), evaluated at x.
    使用数值积分计算 logistic 映射的分数阶积分。
    """
    if not lam > 0.0:
        raise DomainError(f"lambda must be > 0, got {lam}", field='lam')
    lam = float(lam)
    return _rl_quad(lambda t: lam * t * (1.0 - t), alpha, x, spec or QuadratureSpec())


def rl_integral_monomial(alpha, power, x, spec=None):
    """Riemann-Liouville integral of order alpha of t**power, evaluated at x."""
    if not power >= 0.0:
        raise DomainError(f"power must be >= 0, got {power}", field='power')
    power = float(power)
    return _rl_quad(lambda t: t ** power, alpha, x, spec or QuadratureSpec())


def rl_monomial_closed_form(alpha, power, x):
    """Gamma(p+1)/Gamma(p+1+alpha) * x^(p+alpha)."""
    if not x >= 0.0:
        raise DomainError(f"x must be >= 0, got {x}", field='x')
    return gamma(power + 1.0) / gamma(power + 1.0 + alpha) * x ** (power + alpha)


@dataclass(frozen=True)
class SemigroupCheck:
    alpha: float
    beta: float
    x: float
    nested: float
    direct: float

    @property
    def rel_error(self):
        return abs(self.nested - self.direct) / abs(self.direct)


def rl_semigroup_check(alpha, beta, lam, x, grid_nodes=config.SEMIGROUP_GRID_NODES, spec=None):
    """
    Compares I^alpha (I^beta f)(x) with I^(alpha+beta) f(x) for f(t) = lam*t*(1-t).

    The inner integral has no closed form in this computation: it is tabulated on
    `grid_nodes` uniform nodes of [0, x] with the quadrature oracle and
    interpolated by a cubic spline before the outer integral is taken.
    """
    spec = spec or QuadratureSpec()
    grid = np.linspace(0.0, float(x), grid_nodes)
    inner = np.array([rl_integral_logistic(beta, lam, s, spec).value for s in grid])
    spline = CubicSpline(grid, inner)

    # spline error sits near 1e-9; a looser outer target keeps QAGS away from roundoff
    outer_spec = QuadratureSpec(node_budget=10 * spec.node_budget,
                                target_rel_error=max(spec.target_rel_error, 1e-7))
    nested = _rl_quad(lambda t: float(spline(t)), alpha, x, outer_spec).value
    direct = rl_integral_logistic(alpha + beta, lam, x, spec).value
    return SemigroupCheck(alpha=float(alpha), beta=float(beta), x=float(x), nested=nested, direct=direct)
