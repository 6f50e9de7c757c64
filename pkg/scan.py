"""
Parameter Scan Module (参数扫描模块)

Parameter sweeps over the map families:
1. Bifurcation diagrams over lambda or alpha (bifurcation_scan, alpha_slice).
2. Period-doubling location and Feigenbaum delta estimates (find_doublings).
3. (x, alpha) surfaces of the n-times iterated FLM (flm_surface).

Rows are independent; a scan may be split across worker processes and is merged
back in grid order, so the worker count never changes the result.
"""

from dataclasses import dataclass
from multiprocessing import Pool
from typing import Optional, Tuple

import numpy as np
import pandas as pd

import config
from dynamics import cycle_multiplier, detect_period, iterate, orbit_lyapunov, OrbitStatus, OrbitStatusKind
from errors import ConfigurationError, OrbitFailedError, TransitionNotFoundError
from maps import flm_iterate_n, MapFamily, MapSpec, Parameter
from utils import get_loggers

run_logger, error_logger = get_loggers()


@dataclass(frozen=True)
class AxisSpec:
    """
    Uniform grid over lambda or alpha. A single-point axis (steps == 1, min == max)
    is allowed; otherwise min < max and steps >= 2.
    """

    parameter: Parameter
    min: float
    max: float
    steps: int

    def __post_init__(self):
        try:
            parameter = Parameter(self.parameter)
        except ValueError:
            raise ConfigurationError(f"unknown axis parameter '{self.parameter}'", field='parameter')
        object.__setattr__(self, 'parameter', parameter)

        name = parameter.value
        if isinstance(self.steps, bool) or not isinstance(self.steps, (int, np.integer)) or self.steps < 1:
            raise ConfigurationError(f"steps must be a positive integer, got {self.steps}", field='steps')
        if not (np.isfinite(self.min) and np.isfinite(self.max)):
            raise ConfigurationError(f"{name} axis bounds must be finite", field=f'{name}_min')
        if self.steps == 1:
            if self.min != self.max:
                raise ConfigurationError(f"a single-step {name} axis needs min == max", field='steps')
        else:
            if not self.min < self.max:
                raise ConfigurationError(f"{name} axis needs min < max, got [{self.min}, {self.max}]",
                                         field=f'{name}_max')

    def values(self):
        if self.steps == 1:
            return np.array([float(self.min)])
        return np.linspace(float(self.min), float(self.max), self.steps)


@dataclass(frozen=True)
class ScanRow:
    param_value: float
    attractor_samples: Tuple[float, ...]
    period: Optional[int]
    lyapunov: Optional[float]
    orbit_status: OrbitStatus

    @property
    def flagged(self):
        """True for rows whose orbit went negative (kept in output, never clipped)."""
        return self.orbit_status.kind is OrbitStatusKind.DOMAIN_VIOLATION


@dataclass(frozen=True)
class DoublingSequence:
    bifurcation_params: Tuple[float, ...]
    delta_estimates: Tuple[float, ...]


def _scan_row(spec, param_value, cfg, max_period, tol):
    orbit = iterate(spec, cfg)
    if not orbit.status.completed:
        return ScanRow(param_value=param_value, attractor_samples=(), period=None, lyapunov=None,
                       orbit_status=orbit.status)
    period = detect_period(orbit, max_period, tol).period
    return ScanRow(param_value=param_value,
                   attractor_samples=tuple(float(v) for v in orbit.points),
                   period=period,
                   lyapunov=orbit_lyapunov(spec, orbit),
                   orbit_status=orbit.status)


def _scan_chunk(job):
    points, cfg, max_period, tol = job
    return [_scan_row(spec, value, cfg, max_period, tol) for value, spec in points]


def _grid_specs(base, parameter, values):
    return [(float(v), base.with_param(parameter, v)) for v in values]


def _check_axis(base, axis):
    # validity regions are intervals, so checking the endpoints covers the grid
    for bound, value in (('min', axis.min), ('max', axis.max)):
        try:
            base.with_param(axis.parameter, value)
        except ConfigurationError as e:
            raise ConfigurationError(str(e), field=f'{axis.parameter.value}_{bound}')


def _check_period_search(cfg, max_period, tol):
    if isinstance(max_period, bool) or not isinstance(max_period, (int, np.integer)) or max_period < 1:
        raise ConfigurationError(f"max_period must be a positive integer, got {max_period}", field='max_period')
    if 2 * max_period > cfg.samples:
        raise ConfigurationError(f"period search up to {max_period} needs at least {2 * max_period} samples, "
                                 f"got {cfg.samples}", field='max_period')
    if not (isinstance(tol, (int, float)) and np.isfinite(tol) and tol > 0.0):
        raise ConfigurationError(f"tol must be a finite positive number, got {tol}", field='tol')


def _run_rows(points, cfg, max_period, tol, workers):
    if isinstance(workers, bool) or not isinstance(workers, (int, np.integer)) or workers < 1:
        raise ConfigurationError(f"workers must be a positive integer, got {workers}", field='workers')
    if workers == 1 or len(points) < 2:
        return _scan_chunk((points, cfg, max_period, tol))

    # contiguous chunks, merged back in grid order
    bounds = np.linspace(0, len(points), workers + 1).astype(int)
    jobs = [(points[lo:hi], cfg, max_period, tol) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with Pool(processes=workers) as pool:
        parts = pool.map(_scan_chunk, jobs)
    return [row for part in parts for row in part]


def bifurcation_scan(base, axis, cfg, max_period=config.MAX_PERIOD, tol=config.PERIOD_TOL,
                     workers=config.WORKERS):
    """
    One ScanRow per grid point, in grid order: iterate from cfg.x0, discard the
    transient, record the samples, attach the detected period and Lyapunov exponent.
    Rows whose orbit escaped or went negative carry empty samples.
    分岔图扫描。
    """
    _check_axis(base, axis)
    _check_period_search(cfg, max_period, tol)
    points = _grid_specs(base, axis.parameter, axis.values())
    rows = _run_rows(points, cfg, max_period, tol, workers)

    counts = {kind.value: 0 for kind in OrbitStatusKind}
    for row in rows:
        counts[row.orbit_status.kind.value] += 1
    run_logger.info(f"Scan {base.family.value} over {axis.parameter.value} [{axis.min}, {axis.max}] "
                    f"x{axis.steps} with {workers} worker(s): {counts}")
    return rows


def alpha_slice(lam, alpha_axis, cfg, max_period=config.MAX_PERIOD, tol=config.PERIOD_TOL,
                workers=config.WORKERS):
    """Bifurcation scan of the FLM with lambda held fixed and alpha swept."""
    if alpha_axis.parameter is not Parameter.ALPHA:
        raise ConfigurationError("alpha_slice needs an alpha axis", field='parameter')
    base = MapSpec(MapFamily.FLM, lam=lam, alpha=float(alpha_axis.min))
    return bifurcation_scan(base, alpha_axis, cfg, max_period=max_period, tol=tol, workers=workers)


def _is_doubling(p, q):
    """True when q = p * 2^j for some j >= 1."""
    if q is None or q <= p or q % p:
        return False
    ratio = q // p
    return ratio & (ratio - 1) == 0


def _find_cell(periods, p, start):
    """
    (i, j): j is the first index after a period-p row whose period is a doubling
    of p, i the last period-p row before j. None when no such cell exists.
    """
    last_p = None
    for idx in range(start, len(periods)):
        q = periods[idx]
        if q == p:
            last_p = idx
        elif last_p is not None and _is_doubling(p, q):
            return last_p, idx
    return None


class _Predicate:
    """Whether the period-p cycle is still attracting (multiplier > -1) at a parameter value."""

    def __init__(self, base, parameter, cfg, p):
        self.base = base
        self.parameter = parameter
        self.cfg = cfg
        self.p = p

    def __call__(self, value):
        spec = self.base.with_param(self.parameter, value)
        try:
            _, multiplier = cycle_multiplier(spec, self.p, self.cfg)
        except OrbitFailedError as e:
            raise TransitionNotFoundError(f"period {self.p} cycle lost at {self.parameter.value}={value}: {e}")
        return multiplier > -1.0


def _bracket(values, i, j, attracting, lowest, search=16):
    """
    Moves i down and j up along `values` until attracting(values[i]) and
    not attracting(values[j]); period detection near a threshold converges
    slowly and can misplace the first doubled row.
    """
    steps = 0
    while not attracting(values[i]):
        steps += 1
        if i <= lowest or steps > search:
            return None
        i -= 1
    steps = 0
    while attracting(values[j]):
        steps += 1
        if j >= len(values) - 1 or steps > search:
            return None
        j += 1
    return i, j


def find_doublings(base, axis, cfg, max_k=config.MAX_K, max_period=config.MAX_PERIOD, tol=config.PERIOD_TOL,
                   workers=config.WORKERS):
    """
    Locates the first max_k period doublings 1->2->...->2^max_k along the axis.

    The grid scan brackets each transition between adjacent rows whose detected
    period changes p -> 2p (a cell that jumps further is refined x8 first). Inside
    the bracket the transition is bisected to BISECTION_TOL on the sign of
    multiplier + 1 of the period-p cycle.
    """
    if isinstance(max_k, bool) or not isinstance(max_k, (int, np.integer)) or max_k < 1:
        raise ConfigurationError(f"max_k must be a positive integer, got {max_k}", field='max_k')

    rows = bifurcation_scan(base, axis, cfg, max_period=max_period, tol=tol, workers=workers)
    values = [row.param_value for row in rows]
    periods = [row.period for row in rows]

    params = []
    start = 0
    for k in range(max_k):
        p = 2 ** k
        cell = _find_cell(periods, p, start)
        if cell is None:
            raise TransitionNotFoundError(
                f"no period {p} -> {2 * p} transition in {axis.parameter.value} [{axis.min}, {axis.max}]")
        i, j = cell
        attracting = _Predicate(base, axis.parameter, cfg, p)

        if periods[j] == 2 * p:
            bracket = _bracket(values, i, j, attracting, lowest=start)
            grid = values
        else:
            # period jumped more than one doubling across the cell: refine it
            grid = list(np.linspace(values[i], values[j], config.REFINE_FACTOR + 1))
            fine_rows = _run_rows(_grid_specs(base, axis.parameter, grid), cfg, max_period, tol, 1)
            fine_cell = _find_cell([row.period for row in fine_rows], p, 0)
            if fine_cell is None or fine_rows[fine_cell[1]].period != 2 * p:
                raise TransitionNotFoundError(
                    f"period {p} -> {2 * p} transition not resolved between "
                    f"{axis.parameter.value}={values[i]} and {values[j]}")
            bracket = _bracket(grid, fine_cell[0], fine_cell[1], attracting, lowest=0)

        if bracket is None:
            raise TransitionNotFoundError(
                f"period {p} cycle multiplier does not cross -1 near {axis.parameter.value}={values[j]}")
        lo, hi = grid[bracket[0]], grid[bracket[1]]
        while hi - lo > config.BISECTION_TOL:
            mid = 0.5 * (lo + hi)
            if attracting(mid):
                lo = mid
            else:
                hi = mid
        param = 0.5 * (lo + hi)
        if params and not param > params[-1]:
            raise TransitionNotFoundError(f"doubling {p} -> {2 * p} at {param} does not follow {params[-1]}")
        params.append(param)
        run_logger.info(f"Doubling {p} -> {2 * p} at {axis.parameter.value} = {param:.9f}")
        start = j

    deltas = tuple((params[k] - params[k - 1]) / (params[k + 1] - params[k]) for k in range(1, len(params) - 1))
    return DoublingSequence(bifurcation_params=tuple(params), delta_estimates=deltas)


def flm_surface(lam, x_values, alpha_values, iterates=1):
    """
    Q^(n)(x) on the (x, alpha) grid, n = iterates. Columns: x, alpha, value.
    NaN marks compositions that left the real domain.
    """
    records = []
    for alpha in alpha_values:
        for x in x_values:
            records.append((float(x), float(alpha), flm_iterate_n(float(alpha), lam, float(x), iterates)))
    return pd.DataFrame.from_records(records, columns=['x', 'alpha', 'value'])
