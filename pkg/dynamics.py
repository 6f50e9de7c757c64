"""
Dynamics Module (离散动力学模块)

Discrete-time machinery for x_{n+1} = f(x_n):
1. Orbit iteration with escape and domain handling (iterate).
2. Cycle-period detection on a completed orbit (detect_period).
3. Lyapunov exponents (lyapunov, orbit_lyapunov).
4. Numerical fixed points of the FLM, x^(1+a) - ((a+2)/2) x^a + Gamma(a+3)/(2 l) = 0 (fixed_points).
5. Fixed-point identity Q(x) = x residual (check_fixed_point_identity).
6. Period-p cycle location and multiplier by Newton on f^p(x) - x (cycle_multiplier).

Orbit statuses are data: an escaped or negative iterate ends the orbit, it never raises.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

import config
from errors import ConfigurationError, DomainError, InsufficientSamplesError, OrbitFailedError
from maps import flm_derivative, flm_eval, flm_upper_zero, map_functions
from specfun import gamma
from utils import get_loggers

run_logger, error_logger = get_loggers()


class OrbitStatusKind(str, Enum):
    COMPLETED = 'completed'
    ESCAPED = 'escaped'
    DOMAIN_VIOLATION = 'domain_violation'


@dataclass(frozen=True)
class OrbitStatus:
    kind: OrbitStatusKind
    step: Optional[int] = None  # first offending iteration index

    @property
    def completed(self):
        return self.kind is OrbitStatusKind.COMPLETED

    def __str__(self):
        return self.kind.value


COMPLETED = OrbitStatus(OrbitStatusKind.COMPLETED)


@dataclass(frozen=True)
class OrbitConfig:
    """
    Start point, discarded transient, recorded samples and escape bound.
    escape_bound None means 10 * (1 + alpha/2) for the map being iterated.
    """

    x0: float = config.X0
    transient: int = config.TRANSIENT
    samples: int = config.SAMPLES
    escape_bound: Optional[float] = None

    def __post_init__(self):
        if not (self.x0 >= 0.0 and math.isfinite(self.x0)):
            raise ConfigurationError(f"x0 must be a finite value >= 0, got {self.x0}", field='x0')
        if not _is_int(self.transient) or self.transient < 0:
            raise ConfigurationError(f"transient must be a non-negative integer, got {self.transient}",
                                     field='transient')
        if not _is_int(self.samples) or self.samples < 1:
            raise ConfigurationError(f"samples must be a positive integer, got {self.samples}", field='samples')
        if self.transient + self.samples > config.MAX_ORBIT_LENGTH:
            raise ConfigurationError(f"transient + samples must not exceed {config.MAX_ORBIT_LENGTH}",
                                     field='samples')
        if self.escape_bound is not None and not self.escape_bound > 0.0:
            raise ConfigurationError(f"escape_bound must be > 0, got {self.escape_bound}", field='escape_bound')

    def resolved_escape_bound(self, spec):
        if self.escape_bound is not None:
            return float(self.escape_bound)
        return config.ESCAPE_FACTOR * (1.0 + spec.alpha / 2.0)


def _is_int(value):
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


@dataclass(frozen=True, eq=False)
class Orbit:
    points: np.ndarray  # x_T, ..., x_{T+S-1}, truncated at the first offending step
    status: OrbitStatus
    transient: int = 0


@dataclass(frozen=True)
class PeriodResult:
    period: Optional[int]
    cycle_points: Tuple[float, ...] = ()


class Stability(str, Enum):
    ATTRACTING = 'attracting'
    REPELLING = 'repelling'
    NEUTRAL = 'neutral'


def classify_multiplier(multiplier):
    if abs(multiplier) < 1.0 - config.STABILITY_MARGIN:
        return Stability.ATTRACTING
    if abs(multiplier) > 1.0 + config.STABILITY_MARGIN:
        return Stability.REPELLING
    return Stability.NEUTRAL


@dataclass(frozen=True)
class FixedPoint:
    x: float
    residual: float  # |x^(1+a) - ((a+2)/2) x^a + Gamma(a+3)/(2 l)|
    multiplier: float
    stability: Stability


@dataclass(frozen=True)
class FixedPointSet:
    roots: Tuple[FixedPoint, ...]
    includes_origin: bool = True


def iterate(spec, cfg):
    """
    Iterates the map from cfg.x0; discards cfg.transient iterates, records cfg.samples.
    Stops with ESCAPED when an iterate exceeds the escape bound (or is not finite)
    and with DOMAIN_VIOLATION when an iterate is negative.
    """
    f, _ = map_functions(spec)
    bound = cfg.resolved_escape_bound(spec)
    transient = cfg.transient
    total = cfg.transient + cfg.samples

    points = []
    status = COMPLETED
    x = float(cfg.x0)
    n = 0
    while True:
        if x < 0.0:
            status = OrbitStatus(OrbitStatusKind.DOMAIN_VIOLATION, n)
            break
        if not x <= bound:
            status = OrbitStatus(OrbitStatusKind.ESCAPED, n)
            break
        if n >= transient:
            points.append(x)
        n += 1
        if n == total:
            break
        x = f(x)

    return Orbit(points=np.array(points, dtype=float), status=status, transient=transient)


def detect_period(orbit, max_period=config.MAX_PERIOD, tol=config.PERIOD_TOL):
    """
    Smallest p <= max_period with |x_{n+p} - x_n| <= tol * max(1, |x_n|) over the
    whole recorded tail; period None when no such p exists.
    检测轨道周期。
    """
    if not orbit.status.completed:
        raise OrbitFailedError(f"period detection needs a completed orbit, status is {orbit.status}")
    if not _is_int(max_period) or max_period < 1:
        raise ConfigurationError(f"max_period must be a positive integer, got {max_period}", field='max_period')
    if not tol > 0.0:
        raise ConfigurationError(f"tol must be > 0, got {tol}", field='tol')

    points = orbit.points
    if len(points) < 2 * max_period:
        raise InsufficientSamplesError(
            f"{len(points)} samples recorded, period search up to {max_period} needs {2 * max_period}")

    scale = tol * np.maximum(1.0, np.abs(points))
    for p in range(1, max_period + 1):
        if np.all(np.abs(points[p:] - points[:-p]) <= scale[:-p]):
            return PeriodResult(period=p, cycle_points=tuple(float(v) for v in points[-p:]))
    return PeriodResult(period=None)


def orbit_lyapunov(spec, orbit):
    """
    Mean of ln|f'(x_n)| over the recorded points; None (undefined) when any
    |f'(x_n)| < 1e-300. Dropping such terms would bias the exponent.
    """
    _, df = map_functions(spec)
    points = orbit.points
    derivatives = np.abs(np.fromiter((df(x) for x in points), dtype=float, count=len(points)))
    if len(derivatives) == 0 or np.any(derivatives < 1e-300):
        return None
    return float(np.mean(np.log(derivatives)))


def lyapunov(spec, cfg):
    """Lyapunov exponent over cfg.samples post-transient points."""
    orbit = iterate(spec, cfg)
    if not orbit.status.completed:
        msg = (f"lyapunov: orbit of {spec.family.value} (lam={spec.lam}, alpha={spec.alpha}) "
               f"ended with {orbit.status} at step {orbit.status.step}")
        error_logger.error(msg)
        raise OrbitFailedError(msg)
    return orbit_lyapunov(spec, orbit)


def check_fixed_point_identity(alpha, lam, x):
    """|Q(x) - x|, the residual of the undivided fixed-point equation."""
    return abs(flm_eval(alpha, lam, x) - x)


def _newton_bisect(h, dh, lo, hi, max_iter=2000):
    """
    Root of h bracketed by [lo, hi]: Newton steps, bisection whenever Newton
    would leave the bracket or is not shrinking fast enough.
    """
    h_lo, h_hi = h(lo), h(hi)
    if h_lo == 0.0:
        return lo
    if h_hi == 0.0:
        return hi
    # orient the search so that h(x_neg) < 0
    if h_lo < 0.0:
        x_neg, x_pos = lo, hi
    else:
        x_neg, x_pos = hi, lo

    x = 0.5 * (lo + hi)
    dx_old = abs(hi - lo)
    dx = dx_old
    fx, dfx = h(x), dh(x)
    for _ in range(max_iter):
        if ((x - x_pos) * dfx - fx) * ((x - x_neg) * dfx - fx) > 0.0 or abs(2.0 * fx) > abs(dx_old * dfx):
            dx_old = dx
            dx = 0.5 * (x_pos - x_neg)
            x = x_neg + dx
            if x == x_neg:
                break
        else:
            dx_old = dx
            dx = fx / dfx
            previous = x
            x -= dx
            if x == previous:
                break
        if abs(dx) <= 2e-16 * abs(x):
            break
        fx, dfx = h(x), dh(x)
        if fx == 0.0:
            break
        if fx < 0.0:
            x_neg = x
        else:
            x_pos = x
    return x


def fixed_points(alpha, lam):
    """
    Positive fixed points of the FLM in ]0, 1 + alpha/2].

    Solves x^(1+a) - ((a+2)/2) x^a + Gamma(a+3)/(2 l) = 0 (Q(x) = x divided by x)
    by sign changes on a uniform grid and Newton/bisection refinement. The
    origin is always a fixed point and is reported through includes_origin.
    求解不动点方程。
    """
    if not 0.0 <= alpha <= config.MAX_ALPHA:
        raise DomainError(f"alpha must lie in [0, {config.MAX_ALPHA}], got {alpha}", field='alpha')
    if not lam > 0.0:
        raise DomainError(f"lambda must be > 0, got {lam}", field='lam')
    alpha = float(alpha)
    lam = float(lam)

    a1 = 1.0 + alpha
    half = (alpha + 2.0) / 2.0
    constant = gamma(alpha + 3.0) / (2.0 * lam)

    def h(x):
        return x ** a1 - half * x ** alpha + constant

    def dh(x):
        if alpha == 0.0:
            return 1.0
        if x <= 0.0:
            return -math.inf if alpha < 1.0 else 0.0
        return a1 * x ** alpha - half * alpha * x ** (alpha - 1.0)

    upper = flm_upper_zero(alpha)
    n_nodes = config.FIXED_POINT_GRID_NODES
    # node 0 closes the first cell with the x -> 0+ limit of h
    nodes = upper * np.arange(n_nodes + 1) / n_nodes
    values = h(nodes)

    candidates = []
    for i in range(n_nodes):
        a, b = float(nodes[i]), float(nodes[i + 1])
        if values[i] == 0.0:
            if a > 0.0:
                candidates.append(a)
        elif values[i] * values[i + 1] < 0.0:
            candidates.append(_newton_bisect(h, dh, a, b))
    if values[n_nodes] == 0.0:
        candidates.append(float(nodes[n_nodes]))

    roots = []
    for x in candidates:
        if not x > 0.0:
            continue
        residual = abs(h(x))
        if residual > config.FIXED_POINT_RESIDUAL or check_fixed_point_identity(alpha, lam, x) > 1e-10 * max(1.0, x):
            error_logger.error(f"fixed_points(alpha={alpha}, lam={lam}): dropped x={x!r}, residual {residual:.3g}")
            continue
        multiplier = flm_derivative(alpha, lam, x)
        roots.append(FixedPoint(x=x, residual=residual, multiplier=multiplier,
                                stability=classify_multiplier(multiplier)))

    return FixedPointSet(roots=tuple(roots), includes_origin=True)


def cycle_multiplier(spec, period, cfg, max_iter=60):
    """
    Locates a point of the period-`period` cycle near the orbit tail and returns
    (point, multiplier), multiplier = prod f'(x_i) over the cycle.

    Newton runs on F(x) - x with F = f^period, seeded midway between x_n and
    x_{n+period}. Past a doubling this still finds the (now unstable) cycle,
    since the doubled orbit straddles it.
    """
    orbit = iterate(spec, replace(cfg, samples=max(cfg.samples, 2 * period + 1)))
    if not orbit.status.completed:
        raise OrbitFailedError(f"cycle search: orbit ended with {orbit.status} at step {orbit.status.step}")
    f, df = map_functions(spec)

    def compose(x):
        y, m = x, 1.0
        for _ in range(period):
            if not y >= 0.0:
                raise OrbitFailedError(f"cycle search left the real domain at lam={spec.lam}, alpha={spec.alpha}")
            m *= df(y)
            y = f(y)
        return y, m

    points = orbit.points
    x = 0.5 * (points[-1] + points[-1 - period])
    for _ in range(max_iter):
        y, m = compose(x)
        if m == 1.0:
            raise OrbitFailedError(f"cycle Newton hit a unit multiplier at lam={spec.lam}, alpha={spec.alpha}")
        step = (y - x) / (m - 1.0)
        x -= step
        if not (x >= 0.0 and math.isfinite(x)):
            raise OrbitFailedError(f"cycle Newton diverged at lam={spec.lam}, alpha={spec.alpha}")
        if abs(step) <= 1e-14 * max(1.0, abs(x)):
            break
    else:
        raise OrbitFailedError(f"cycle Newton did not converge at lam={spec.lam}, alpha={spec.alpha}")

    _, multiplier = compose(x)
    return float(x), float(multiplier)
