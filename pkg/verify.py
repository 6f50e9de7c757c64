"""
Verification Suite Module (自检模块)

Cross-checks run by `main.py verify`. Each check compares an implementation
against an independent oracle (mpmath, finite differences, RL quadrature,
closed-form identities) and reports one CheckResult row.
"""

import time
from dataclasses import dataclass

import mpmath
import numpy as np

from dynamics import fixed_points
from errors import FraclogError
from maps import flm_derivative, flm_eval, flm_upper_zero, map_derivative, map_eval, MapFamily, MapSpec
from specfun import gamma, rl_integral_logistic, rl_semigroup_check
from utils import get_loggers

run_logger, error_logger = get_loggers()

GAMMA_POINTS = (0.5, 1.0, 1.5, 2.0, 2.5, 3.5, 5.0, 0.7, 3.3, 7.9)
REDUCTION_LAMBDAS = (0.5, 1.0, 2.5, 4.0)
ZERO_ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)
ZERO_LAMBDAS = (1.0, 4.0, 6.0)
DERIVATIVE_ALPHAS = (1.2, 1.5, 2.0)
SEMIGROUP_ORDERS = ((0.5, 0.5), (0.3, 0.7), (1.0, 0.5))
SEMIGROUP_POINTS = (0.5, 1.0, 2.0)
SEMIGROUP_LAMBDA = 4.0

FD_STEP = 1e-5


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_gamma_reference():
    mpmath.mp.dps = 30
    worst = 0.0
    for x in GAMMA_POINTS:
        reference = float(mpmath.gamma(mpmath.mpf(x)))
        worst = max(worst, abs(gamma(x) - reference) / reference)
    return worst <= 1e-13, f"max rel error {worst:.3g} over {len(GAMMA_POINTS)} points"


def check_gamma_recurrence():
    rng = np.random.default_rng(0)
    worst = 0.0
    for x in rng.uniform(0.5, 8.0, 50):
        expected = x * gamma(x)
        worst = max(worst, abs(gamma(x + 1.0) - expected) / expected)
    return worst <= 1e-12, f"max rel error {worst:.3g} over 50 points"


def check_reduction():
    worst = 0.0
    for lam in REDUCTION_LAMBDAS:
        for x in np.linspace(0.0, 1.0, 101):
            worst = max(worst, abs(flm_eval(0.0, lam, float(x)) - lam * x * (1.0 - x)))
    return worst <= 1e-14, f"max abs error {worst:.3g} on 4x101 grid"


def check_zeros():
    worst = 0.0
    for alpha in ZERO_ALPHAS:
        for lam in ZERO_LAMBDAS:
            if flm_eval(alpha, lam, 0.0) != 0.0:
                return False, f"Q(0) != 0 at alpha={alpha}, lambda={lam}"
            worst = max(worst, abs(flm_eval(alpha, lam, flm_upper_zero(alpha))))
    return worst <= 1e-13, f"max |Q(1 + alpha/2)| {worst:.3g}"


def check_derivative_order_shift():
    lam = 4.0
    worst = 0.0
    for alpha in DERIVATIVE_ALPHAS:
        for x in np.linspace(0.1, 2.0, 20):
            expected = flm_eval(alpha - 1.0, lam, float(x))
            error = abs(flm_derivative(alpha, lam, float(x)) - expected) / max(1.0, abs(expected))
            worst = max(worst, error)
    return worst <= 1e-12, f"max scaled error {worst:.3g}"


def _random_specs(rng, count):
    for _ in range(count):
        yield MapSpec(MapFamily.FLM, lam=rng.uniform(1.0, 6.0), alpha=rng.uniform(0.0, 1.0))
        yield MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=rng.uniform(1.0, 4.0))
        yield MapSpec(MapFamily.RICKER, lam=rng.uniform(1.5, 20.0), beta=rng.uniform(0.5, 2.0))
        yield MapSpec(MapFamily.HASSEL, lam=rng.uniform(1.5, 20.0), beta=rng.uniform(0.5, 2.0))


def check_gradients():
    """5-point central differences against the analytic derivatives."""
    rng = np.random.default_rng(1)
    h = FD_STEP
    worst = 0.0
    samples = 0
    for spec in _random_specs(rng, 25):
        for x in rng.uniform(0.05, 1.2, 4):
            x = float(x)
            fd = (-map_eval(spec, x + 2 * h) + 8 * map_eval(spec, x + h)
                  - 8 * map_eval(spec, x - h) + map_eval(spec, x - 2 * h)) / (12 * h)
            analytic = map_derivative(spec, x)
            worst = max(worst, abs(fd - analytic) / max(1.0, abs(analytic)))
            samples += 1
    return worst <= 1e-7, f"max scaled error {worst:.3g} over {samples} samples"


def check_closed_form_quadrature(quad_spec=None):
    worst = 0.0
    for alpha in np.linspace(0.2, 1.5, 5):
        for lam in np.linspace(1.0, 6.0, 5):
            for x in np.linspace(0.1, 2.0, 5):
                closed = flm_eval(float(alpha), float(lam), float(x))
                numeric = rl_integral_logistic(float(alpha), float(lam), float(x), quad_spec).value
                worst = max(worst, abs(numeric - closed) / abs(closed))
    return worst <= 1e-7, f"max rel error {worst:.3g} on 125 points"


def check_semigroup(quad_spec=None):
    worst = 0.0
    for alpha, beta in SEMIGROUP_ORDERS:
        for x in SEMIGROUP_POINTS:
            worst = max(worst, rl_semigroup_check(alpha, beta, SEMIGROUP_LAMBDA, x, spec=quad_spec).rel_error)
    return worst <= 1e-5, f"max rel error {worst:.3g} on 9 points"


def _sign_changes(alpha, lam, nodes=100000):
    a1 = 1.0 + alpha
    # node 0 gives h(0+) = Gamma(a+3)/(2 l), which catches roots below the first cell
    grid = flm_upper_zero(alpha) * np.arange(nodes + 1) / nodes
    h = grid ** a1 - (alpha + 2.0) / 2.0 * grid ** alpha + gamma(alpha + 3.0) / (2.0 * lam)
    return int(np.count_nonzero(np.sign(h[1:]) * np.sign(h[:-1]) < 0))


def check_fixed_points():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        alpha, lam = float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.5, 6.5))
        roots = fixed_points(alpha, lam).roots
        if len(roots) != _sign_changes(alpha, lam):
            return False, f"root count mismatch at alpha={alpha}, lambda={lam}"
        for root in roots:
            worst = max(worst, abs(flm_eval(alpha, lam, root.x) - root.x) / max(1.0, root.x))
    return worst <= 1e-10, f"max |Q(x) - x| {worst:.3g} over 100 (alpha, lambda) pairs"


CHECKS = (
    ('gamma_reference', check_gamma_reference),
    ('gamma_recurrence', check_gamma_recurrence),
    ('reduction', check_reduction),
    ('zeros', check_zeros),
    ('derivative_order_shift', check_derivative_order_shift),
    ('gradients', check_gradients),
    ('closed_form_quadrature', check_closed_form_quadrature),
    ('semigroup', check_semigroup),
    ('fixed_points', check_fixed_points),
)
QUADRATURE_CHECKS = ('closed_form_quadrature', 'semigroup')


def run_suite(quad_spec=None):
    """
    Runs every check; a check that raises counts as failed.
    quad_spec overrides the quadrature accuracy contract of the RL checks.
    """
    results = []
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check(quad_spec) if name in QUADRATURE_CHECKS else check()
        except FraclogError as e:
            error_logger.error(f"verify {name}: {e}")
            passed, detail = False, f"{type(e).__name__}: {e}"
        seconds = time.perf_counter() - start
        if not passed:
            error_logger.error(f"verify {name} failed: {detail}")
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail, seconds=seconds))
    run_logger.info(f"Verification: {sum(r.passed for r in results)}/{len(results)} checks passed")
    return results
