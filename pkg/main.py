"""
Fractional Logistic Map Toolkit
Main entry point for the command-line interface.
命令行入口程序。

Sub-commands:
1. eval          - evaluate a map (or its derivative) at one point.
2. orbit         - iterate a map and record the post-transient orbit.
3. fixed-points  - positive fixed points of the FLM with their multipliers.
4. bifurcation   - bifurcation scan over lambda.
5. alpha-slice   - bifurcation scan of the FLM over alpha at fixed lambda.
6. doublings     - locate period doublings and estimate the Feigenbaum delta.
7. lyapunov      - one Lyapunov exponent, or a scan over lambda.
8. verify        - run the oracle suite.
9. surface       - (x, alpha) surface of the iterated FLM.

Exit codes: 0 success, 2 invalid configuration, 3 computation failure.
"""

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np
import pandas as pd

import config
from dynamics import fixed_points, iterate, lyapunov, OrbitConfig
from errors import ConfigurationError, FraclogError
from export import (doublings_frame, emit_csv, emit_plot_script, fixed_points_frame, format_config_line,
                    orbit_frame, scan_frame, surface_frame)
from maps import map_derivative, map_eval, MapFamily, MapSpec, Parameter
from scan import AxisSpec, alpha_slice, bifurcation_scan, find_doublings, flm_surface
from specfun import QuadratureSpec
import verify
from utils import atomic_write, format_number, get_loggers, setup_loggers

run_logger, error_logger = get_loggers()

FAILURE_EXIT_CODE = 3

# Error fields whose flag is not simply '--' + field with '-' for '_'
FIELD_FLAGS = {
    'lam': '--lambda',
    'output': '-o',
    'node_budget': '--config',
    'target_rel_error': '--config',
    'rows': '-o',
}


def flag_for(field):
    if field is None:
        return None
    return FIELD_FLAGS.get(field, '--' + field.replace('_', '-'))


def build_parser():
    parser = argparse.ArgumentParser(prog='fraclog',
                                     description='Fractional logistic map toolkit: evaluation, orbits, '
                                                 'bifurcation scans, period doublings and Lyapunov exponents.')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='.properties file overriding defaults (flags still win)')
    common.add_argument('--log-dir', default=config.LOG_DIR, help='log directory (default: %(default)s)')
    common.add_argument('--seed', type=int, help='not accepted: every computation is deterministic')

    family = argparse.ArgumentParser(add_help=False)
    family.add_argument('--family', default=MapFamily.FLM.value, choices=[f.value for f in MapFamily],
                        help='map family (default: %(default)s)')
    family.add_argument('--alpha', type=float,
                        help=f'FLM order (default: {config.DEFAULT_ALPHA} for flm, 0 otherwise)')
    family.add_argument('--beta', type=float, default=1.0, help='ricker/hassel beta (default: %(default)s)')

    lam = argparse.ArgumentParser(add_help=False)
    lam.add_argument('--lambda', dest='lam', type=float, help='map parameter lambda')

    orbit = argparse.ArgumentParser(add_help=False)
    orbit.add_argument('--x0', type=float, help=f'start point (default: {config.X0})')
    orbit.add_argument('--transient', type=int, help=f'discarded iterates (default: {config.TRANSIENT})')
    orbit.add_argument('--samples', type=int, help=f'recorded iterates (default: {config.SAMPLES})')
    orbit.add_argument('--escape-bound', type=float, help='escape threshold (default: 10 * (1 + alpha/2))')

    period = argparse.ArgumentParser(add_help=False)
    period.add_argument('--max-period', type=int, help=f'largest detected period (default: {config.MAX_PERIOD})')
    period.add_argument('--tol', type=float, help=f'period detection tolerance (default: {config.PERIOD_TOL})')

    lambda_axis = argparse.ArgumentParser(add_help=False)
    lambda_axis.add_argument('--lambda-min', type=float, help='lower end of the lambda axis')
    lambda_axis.add_argument('--lambda-max', type=float, help='upper end of the lambda axis')

    alpha_axis = argparse.ArgumentParser(add_help=False)
    alpha_axis.add_argument('--alpha-min', type=float, help=f'lower end of the alpha axis '
                                                             f'(default: {config.SLICE_ALPHA_MIN})')
    alpha_axis.add_argument('--alpha-max', type=float, help=f'upper end of the alpha axis '
                                                             f'(default: {config.SLICE_ALPHA_MAX})')

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument('--steps', type=int, help=f'grid points on the axis (default: {config.SCAN_STEPS})')
    grid.add_argument('--workers', type=int, help=f'worker processes (default: {config.WORKERS})')

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument('-o', '--output', help='CSV output path (stdout when omitted); '
                                               'plot scripts are written next to it')

    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser('eval', parents=[common, family, lam], help='evaluate a map at one point')
    p.add_argument('--x', type=float, required=True, help='evaluation point (>= 0)')
    p.add_argument('--derivative', action='store_true', help="evaluate f'(x) instead of f(x)")

    subparsers.add_parser('orbit', parents=[common, family, lam, orbit, output], help='iterate a map')
    subparsers.add_parser('fixed-points', parents=[common, family, lam, output],
                          help='positive fixed points of the FLM')
    subparsers.add_parser('bifurcation', parents=[common, family, orbit, period, lambda_axis, grid, output],
                          help='bifurcation scan over lambda')
    subparsers.add_parser('alpha-slice', parents=[common, lam, orbit, period, alpha_axis, grid, output],
                          help='FLM bifurcation scan over alpha at fixed lambda')

    p = subparsers.add_parser('doublings', parents=[common, family, orbit, period, lambda_axis, grid, output],
                              help='locate period doublings along lambda')
    p.add_argument('--max-k', type=int, help=f'number of doublings to locate (default: {config.MAX_K})')
    p.add_argument('--freeze', help='also write the sequence as a JSON regression fixture')

    subparsers.add_parser('lyapunov', parents=[common, family, lam, orbit, period, lambda_axis, grid, output],
                          help='Lyapunov exponent; a scan when --lambda-min/--lambda-max are given')
    subparsers.add_parser('verify', parents=[common], help='run the oracle suite')

    p = subparsers.add_parser('surface', parents=[common, lam, output], help='(x, alpha) surface of Q^(n)')
    p.add_argument('--iterates', type=int, default=config.SURFACE_ITERATES,
                   help='number of compositions n (default: %(default)s)')
    p.add_argument('--steps', type=int, default=config.SURFACE_STEPS,
                   help='grid points per axis on [0, 1] (default: %(default)s)')
    return parser


def _resolve(args, overrides, name, default):
    """Flag, then --config file, then the built-in default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    return overrides.get(name, default)


def _map_spec(args, lam=None):
    family = MapFamily(args.family)
    alpha = args.alpha
    if alpha is None:
        alpha = config.DEFAULT_ALPHA if family is MapFamily.FLM else 0.0
    lam = args.lam if lam is None else lam
    if lam is None:
        raise ConfigurationError(f"--lambda is required by '{args.command}'", field='lam')
    return MapSpec(family, lam=lam, alpha=alpha, beta=args.beta)


def _orbit_config(args, overrides):
    return OrbitConfig(x0=_resolve(args, overrides, 'x0', config.X0),
                       transient=_resolve(args, overrides, 'transient', config.TRANSIENT),
                       samples=_resolve(args, overrides, 'samples', config.SAMPLES),
                       escape_bound=_resolve(args, overrides, 'escape_bound', None))


def _period_settings(args, overrides):
    return (_resolve(args, overrides, 'max_period', config.MAX_PERIOD),
            _resolve(args, overrides, 'tol', config.PERIOD_TOL))


def _lambda_axis(args, overrides):
    low, high = config.SCAN_LAMBDA_RANGES.get(args.family, (None, None))
    low = args.lambda_min if args.lambda_min is not None else low
    high = args.lambda_max if args.lambda_max is not None else high
    if low is None:
        raise ConfigurationError(f"the {args.family} family has no default lambda range", field='lambda_min')
    if high is None:
        raise ConfigurationError(f"the {args.family} family has no default lambda range", field='lambda_max')
    return AxisSpec(Parameter.LAMBDA, low, high, _resolve(args, overrides, 'steps', config.SCAN_STEPS))


def _orbit_settings(cfg):
    return {
        'x0': cfg.x0,
        'transient': cfg.transient,
        'samples': cfg.samples,
        'escape_bound': 'auto' if cfg.escape_bound is None else cfg.escape_bound,
    }


def _scan_settings(command, spec, axis, cfg, max_period, tol):
    # worker count is left out: it never changes the result
    settings = {'command': command, 'family': spec.family.value, 'alpha': spec.alpha}
    if spec.family in (MapFamily.RICKER, MapFamily.HASSEL):
        settings['beta'] = spec.beta
    if axis.parameter is Parameter.ALPHA:
        settings['lambda'] = spec.lam
    settings.update({'parameter': axis.parameter.value, 'min': axis.min, 'max': axis.max, 'steps': axis.steps})
    settings.update(_orbit_settings(cfg))
    settings.update({'max_period': max_period, 'tol': tol})
    return settings


def _write(frame, args, settings, plot_kind=None):
    if args.output:
        emit_csv(frame, args.output, settings)
        print(args.output)
        if plot_kind:
            print(emit_plot_script(args.output, plot_kind))
    else:
        sys.stdout.write(format_config_line(settings) + '\n')
        frame.to_csv(sys.stdout, index=False, lineterminator='\n')


def cmd_eval(args, overrides):
    spec = _map_spec(args)
    value = map_derivative(spec, args.x) if args.derivative else map_eval(spec, args.x)
    print(format_number(value))
    return 0


def cmd_orbit(args, overrides):
    spec = _map_spec(args)
    cfg = _orbit_config(args, overrides)
    result = iterate(spec, cfg)
    run_logger.info(f"Orbit {spec.family.value} lam={spec.lam} alpha={spec.alpha}: {result.status} "
                    f"({len(result.points)} points)")
    if len(result.points) == 0:
        raise FraclogError(f"orbit ended with {result.status} at step {result.status.step} "
                           f"before any point was recorded", field='transient')
    settings = {'command': 'orbit', 'family': spec.family.value, 'alpha': spec.alpha, 'lambda': spec.lam}
    settings.update(_orbit_settings(cfg))
    settings['status'] = str(result.status)
    _write(orbit_frame(result), args, settings)
    return 0


def cmd_fixed_points(args, overrides):
    spec = _map_spec(args)
    if spec.family not in (MapFamily.FLM, MapFamily.CLASSIC_LOGISTIC):
        raise ConfigurationError("fixed points are solved for the flm and logistic families only", field='family')
    result = fixed_points(spec.alpha, spec.lam)
    settings = {'command': 'fixed-points', 'family': spec.family.value, 'alpha': spec.alpha, 'lambda': spec.lam}
    _write(fixed_points_frame(result, spec.alpha, spec.lam), args, settings)
    return 0


def _lambda_scan(args, overrides, plot_kind):
    axis = _lambda_axis(args, overrides)
    spec = _map_spec(args, lam=axis.min)
    cfg = _orbit_config(args, overrides)
    max_period, tol = _period_settings(args, overrides)
    workers = _resolve(args, overrides, 'workers', config.WORKERS)
    rows = bifurcation_scan(spec, axis, cfg, max_period=max_period, tol=tol, workers=workers)
    _write(scan_frame(rows), args, _scan_settings(args.command, spec, axis, cfg, max_period, tol), plot_kind)
    return 0


def cmd_bifurcation(args, overrides):
    return _lambda_scan(args, overrides, 'bifurcation')


def cmd_alpha_slice(args, overrides):
    if args.lam is None:
        raise ConfigurationError("--lambda is required by 'alpha-slice'", field='lam')
    low = args.alpha_min if args.alpha_min is not None else config.SLICE_ALPHA_MIN
    high = args.alpha_max if args.alpha_max is not None else config.SLICE_ALPHA_MAX
    axis = AxisSpec(Parameter.ALPHA, low, high, _resolve(args, overrides, 'steps', config.SCAN_STEPS))
    cfg = _orbit_config(args, overrides)
    max_period, tol = _period_settings(args, overrides)
    workers = _resolve(args, overrides, 'workers', config.WORKERS)
    rows = alpha_slice(args.lam, axis, cfg, max_period=max_period, tol=tol, workers=workers)
    spec = MapSpec(MapFamily.FLM, lam=args.lam, alpha=low)
    _write(scan_frame(rows), args, _scan_settings('alpha-slice', spec, axis, cfg, max_period, tol), 'bifurcation')
    return 0


def cmd_doublings(args, overrides):
    axis = _lambda_axis(args, overrides)
    spec = _map_spec(args, lam=axis.min)
    cfg = _orbit_config(args, overrides)
    max_period, tol = _period_settings(args, overrides)
    workers = _resolve(args, overrides, 'workers', config.WORKERS)
    max_k = _resolve(args, overrides, 'max_k', config.MAX_K)

    sequence = find_doublings(spec, axis, cfg, max_k=max_k, max_period=max_period, tol=tol, workers=workers)
    settings = _scan_settings('doublings', spec, axis, cfg, max_period, tol)
    settings['max_k'] = max_k
    _write(doublings_frame(sequence), args, settings)

    if args.freeze:
        fixture = {
            'family': spec.family.value,
            'alpha': spec.alpha,
            'lambda_min': axis.min,
            'lambda_max': axis.max,
            'steps': axis.steps,
            'bifurcation_params': list(sequence.bifurcation_params),
            'delta_estimates': list(sequence.delta_estimates),
        }
        with atomic_write(args.freeze) as f:
            json.dump(fixture, f, indent=2)
            f.write('\n')
        run_logger.info(f"Froze {len(sequence.bifurcation_params)} doublings to {args.freeze}")
    return 0


def cmd_lyapunov(args, overrides):
    if args.lambda_min is not None or args.lambda_max is not None:
        return _lambda_scan(args, overrides, 'lyapunov')
    spec = _map_spec(args)
    exponent = lyapunov(spec, _orbit_config(args, overrides))
    print('undefined' if exponent is None else format_number(exponent))
    return 0


def cmd_verify(args, overrides):
    quad_spec = None
    if 'node_budget' in overrides or 'target_rel_error' in overrides:
        quad_spec = QuadratureSpec(node_budget=overrides.get('node_budget', config.QUAD_NODE_BUDGET),
                                   target_rel_error=overrides.get('target_rel_error', config.QUAD_TARGET_REL_ERROR))
    results = verify.run_suite(quad_spec)
    table = pd.DataFrame([asdict(r) for r in results])
    table['passed'] = table['passed'].map({True: 'PASS', False: 'FAIL'})
    table['seconds'] = table['seconds'].round(3)
    print(table.to_string(index=False))
    return 0 if all(r.passed for r in results) else FAILURE_EXIT_CODE


def cmd_surface(args, overrides):
    lam = args.lam if args.lam is not None else config.SURFACE_LAMBDA
    if args.steps < 2:
        raise ConfigurationError(f"surface needs at least 2 steps per axis, got {args.steps}", field='steps')
    grid = np.linspace(0.0, 1.0, args.steps)
    # validates lambda the way every other command does
    MapSpec(MapFamily.FLM, lam=lam, alpha=0.0)
    surface = flm_surface(lam, grid, grid, args.iterates)
    settings = {'command': 'surface', 'lambda': lam, 'iterates': args.iterates, 'steps': args.steps}
    _write(surface_frame(surface), args, settings, 'surface')
    return 0


COMMANDS = {
    'eval': cmd_eval,
    'orbit': cmd_orbit,
    'fixed-points': cmd_fixed_points,
    'bifurcation': cmd_bifurcation,
    'alpha-slice': cmd_alpha_slice,
    'doublings': cmd_doublings,
    'lyapunov': cmd_lyapunov,
    'verify': cmd_verify,
    'surface': cmd_surface,
}


def run(argv=None):
    """Parses argv, runs one sub-command and returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad flags and 0 after --help
        return e.code if isinstance(e.code, int) else 2

    setup_loggers(args.log_dir)
    try:
        if args.seed is not None:
            raise ConfigurationError("the toolkit is deterministic and takes no seed", field='seed')
        overrides = config.load_overrides(args.config) if args.config else {}
        run_logger.info(f"Command {args.command} started: {vars(args)} overrides={overrides}")
        code = COMMANDS[args.command](args, overrides)
        run_logger.info(f"Command {args.command} finished with exit code {code}")
        return code
    except FraclogError as e:
        flag = flag_for(e.field)
        message = f"{flag}: {e}" if flag else str(e)
        error_logger.error(f"{args.command} failed: {message}")
        print(f"error: {message}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        error_logger.exception(f"Unexpected error in {args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return FAILURE_EXIT_CODE


if __name__ == '__main__':
    sys.exit(run(sys.argv[1:]))
