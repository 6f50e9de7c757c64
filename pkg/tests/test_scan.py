"""Tests for bifurcation scans, alpha slices, doubling location and surfaces."""

import json
import math
import os

import numpy as np
import pytest

from dynamics import OrbitConfig, OrbitStatusKind
from errors import ConfigurationError, TransitionNotFoundError
from maps import flm_eval, MapFamily, MapSpec, Parameter
from scan import AxisSpec, alpha_slice, bifurcation_scan, find_doublings, flm_surface

FIXTURE = os.path.join(os.path.dirname(__file__), 'fixtures', 'flm_alpha_half_doublings.json')
SEMI_FIRST_DOUBLING = 21.0 * math.sqrt(7.0 * math.pi) / 20.0


@pytest.fixture(scope='module')
def classic_scan():
    axis = AxisSpec(Parameter.LAMBDA, 2.5, 4.0, 1501)
    return bifurcation_scan(MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=2.5), axis, OrbitConfig())


@pytest.fixture(scope='module')
def semi_scan():
    axis = AxisSpec(Parameter.LAMBDA, 4.5, 6.1, 1601)
    return bifurcation_scan(MapSpec(MapFamily.FLM, lam=4.5, alpha=0.5), axis, OrbitConfig())


@pytest.fixture(scope='module')
def classic_doublings():
    axis = AxisSpec(Parameter.LAMBDA, 2.8, 3.58, 781)
    return find_doublings(MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=2.8), axis, OrbitConfig(), max_k=3)


@pytest.fixture(scope='module')
def semi_doublings():
    axis = AxisSpec(Parameter.LAMBDA, 4.5, 6.1, 1601)
    return find_doublings(MapSpec(MapFamily.FLM, lam=4.5, alpha=0.5), axis, OrbitConfig(), max_k=3)


def rows_between(rows, low, high):
    return [row for row in rows if low <= row.param_value <= high]


class TestAxisSpec:

    def test_values(self):
        axis = AxisSpec(Parameter.LAMBDA, 4.5, 6.1, 1601)
        values = axis.values()
        assert len(values) == 1601
        assert values[0] == 4.5 and values[-1] == 6.1
        assert values[100] == pytest.approx(4.6, abs=1e-12)

    def test_single_point(self):
        assert list(AxisSpec('alpha', 0.0, 0.0, 1).values()) == [0.0]

    @pytest.mark.parametrize("args", [
        ('lambda', 3.0, 2.0, 10),
        ('lambda', 2.0, 2.0, 10),
        ('lambda', 2.0, 3.0, 0),
        ('lambda', 2.0, 3.0, 1),
        ('lambda', 2.0, math.inf, 10),
        ('beta', 2.0, 3.0, 10),
    ])
    def test_invalid(self, args):
        with pytest.raises(ConfigurationError):
            AxisSpec(*args)


class TestClassicScan:

    def test_row_per_grid_point(self, classic_scan):
        assert len(classic_scan) == 1501
        assert [row.param_value for row in classic_scan] == list(AxisSpec(Parameter.LAMBDA, 2.5, 4.0, 1501).values())

    def test_cascade(self, classic_scan):
        assert all(row.period == 1 for row in rows_between(classic_scan, 2.5, 2.95))
        assert all(row.period == 2 for row in rows_between(classic_scan, 3.05, 3.42))
        assert all(row.period == 4 for row in rows_between(classic_scan, 3.47, 3.53))
        chaotic = [row for row in rows_between(classic_scan, 3.57, 4.0)
                   if row.period is None and row.lyapunov is not None and row.lyapunov > 0.0]
        assert chaotic

    def test_period_monotone(self, classic_scan):
        periods = [row.period for row in rows_between(classic_scan, 2.8, 3.55) if row.period is not None]
        assert set(periods) <= {1, 2, 4, 8}
        assert periods == sorted(periods)

    def test_samples_recorded(self, classic_scan):
        for row in classic_scan:
            assert row.orbit_status.completed
            assert len(row.attractor_samples) == 400
            assert all(0.0 <= x <= 1.0 for x in row.attractor_samples)


class TestSemiLogisticScan:

    def test_starts_on_a_fixed_point(self, semi_scan):
        assert semi_scan[0].param_value == 4.5
        assert semi_scan[0].period == 1

    def test_reaches_chaos(self, semi_scan):
        assert any(row.period is None and row.lyapunov is not None and row.lyapunov > 0.0 for row in semi_scan)

    def test_stays_in_invariant_interval(self, semi_scan):
        assert not any(row.flagged for row in semi_scan)
        assert all(row.orbit_status.kind is OrbitStatusKind.COMPLETED for row in semi_scan)

    def test_period_one_before_first_doubling(self, semi_scan):
        assert all(row.period == 1 for row in rows_between(semi_scan, 4.5, SEMI_FIRST_DOUBLING - 0.02))


class TestReduction:

    @pytest.mark.parametrize("lam,x0", [(3.2, 0.5), (4.0, 0.3)])
    def test_alpha_zero_slice_matches_classic(self, lam, x0):
        cfg = OrbitConfig(x0=x0)
        slice_rows = alpha_slice(lam, AxisSpec(Parameter.ALPHA, 0.0, 0.0, 1), cfg)
        classic_rows = bifurcation_scan(MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=lam),
                                        AxisSpec(Parameter.LAMBDA, lam, lam, 1), cfg)
        assert slice_rows[0].attractor_samples == classic_rows[0].attractor_samples
        assert slice_rows[0].period == classic_rows[0].period
        assert slice_rows[0].lyapunov == classic_rows[0].lyapunov


class TestAlphaSlice:

    def test_near_semi_logistic(self):
        rows = alpha_slice(5.0, AxisSpec(Parameter.ALPHA, 0.4, 0.6, 3), OrbitConfig())
        assert [row.param_value for row in rows] == pytest.approx([0.4, 0.5, 0.6])
        assert all(row.orbit_status.completed for row in rows)
        for row in rows:
            alpha = row.param_value
            assert flm_eval(alpha, 5.0, (1.0 + alpha) / 2.0) < 1.0 + alpha / 2.0

    def test_full_range_does_not_abort(self):
        rows = alpha_slice(5.0, AxisSpec(Parameter.ALPHA, 0.0, 1.0, 101), OrbitConfig())
        assert len(rows) == 101
        for row in rows:
            if row.flagged:
                assert row.attractor_samples == ()
                assert row.period is None and row.lyapunov is None

    def test_needs_alpha_axis(self):
        with pytest.raises(ConfigurationError):
            alpha_slice(5.0, AxisSpec(Parameter.LAMBDA, 4.0, 5.0, 3), OrbitConfig())

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigurationError) as excinfo:
            alpha_slice(5.0, AxisSpec(Parameter.ALPHA, 0.0, 6.0, 3), OrbitConfig())
        assert excinfo.value.field == 'alpha_max'


class TestParallelScan:

    @pytest.mark.parametrize("workers", [1, 4])
    def test_workers_do_not_change_rows(self, workers):
        base = MapSpec(MapFamily.FLM, lam=4.5, alpha=0.5)
        axis = AxisSpec(Parameter.LAMBDA, 4.5, 6.1, 81)
        serial = bifurcation_scan(base, axis, OrbitConfig(), workers=1)
        assert bifurcation_scan(base, axis, OrbitConfig(), workers=workers) == serial

    def test_invalid_workers(self):
        base = MapSpec(MapFamily.FLM, lam=4.5, alpha=0.5)
        with pytest.raises(ConfigurationError):
            bifurcation_scan(base, AxisSpec(Parameter.LAMBDA, 4.5, 5.0, 3), OrbitConfig(), workers=0)

    @pytest.mark.parametrize("max_period,samples", [(0, 400), (201, 400), (128, 200)])
    def test_invalid_period_search(self, max_period, samples):
        base = MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=3.0)
        with pytest.raises(ConfigurationError) as excinfo:
            bifurcation_scan(base, AxisSpec(Parameter.LAMBDA, 3.0, 3.2, 3), OrbitConfig(samples=samples),
                             max_period=max_period)
        assert excinfo.value.field == 'max_period'

    def test_invalid_tolerance(self):
        base = MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=3.0)
        with pytest.raises(ConfigurationError) as excinfo:
            bifurcation_scan(base, AxisSpec(Parameter.LAMBDA, 3.0, 3.2, 3), OrbitConfig(), tol=0.0)
        assert excinfo.value.field == 'tol'

    def test_invalid_grid_is_rejected_before_work(self):
        base = MapSpec(MapFamily.RICKER, lam=2.0)
        with pytest.raises(ConfigurationError) as excinfo:
            bifurcation_scan(base, AxisSpec(Parameter.LAMBDA, 0.5, 5.0, 10), OrbitConfig())
        assert excinfo.value.field == 'lambda_min'


class TestDoublings:

    def test_classic_locations(self, classic_doublings):
        first, second, third = classic_doublings.bifurcation_params
        assert first == pytest.approx(3.0, abs=1e-3)
        assert second == pytest.approx(1.0 + math.sqrt(6.0), abs=1e-3)
        assert third == pytest.approx(3.5441, abs=1e-3)

    def test_classic_delta(self, classic_doublings):
        delta, = classic_doublings.delta_estimates
        assert 4.3 <= delta <= 5.2
        assert delta == pytest.approx(4.75, abs=0.4)

    def test_semi_logistic_cascade(self, semi_doublings):
        params = semi_doublings.bifurcation_params
        assert len(params) >= 3
        assert all(4.5 < p < 6.1 for p in params)
        assert list(params) == sorted(set(params))
        assert params[0] == pytest.approx(SEMI_FIRST_DOUBLING, abs=1e-5)

    def test_semi_logistic_matches_frozen_fixture(self, semi_doublings):
        assert os.path.exists(FIXTURE), "regenerate with main.py doublings --family flm --alpha 0.5 --freeze"
        with open(FIXTURE) as f:
            frozen = json.load(f)
        assert (frozen['family'], frozen['alpha'], frozen['steps']) == ('flm', 0.5, 1601)
        assert len(semi_doublings.bifurcation_params) == len(frozen['bifurcation_params'])
        assert list(semi_doublings.bifurcation_params) == pytest.approx(frozen['bifurcation_params'], abs=1e-4)
        assert list(semi_doublings.delta_estimates) == pytest.approx(frozen['delta_estimates'], abs=1e-2)

    def test_no_transition_in_range(self):
        axis = AxisSpec(Parameter.LAMBDA, 2.0, 2.8, 81)
        with pytest.raises(TransitionNotFoundError):
            find_doublings(MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=2.0), axis, OrbitConfig(), max_k=1)

    def test_invalid_max_k(self):
        axis = AxisSpec(Parameter.LAMBDA, 2.8, 3.6, 81)
        with pytest.raises(ConfigurationError):
            find_doublings(MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=2.8), axis, OrbitConfig(), max_k=0)


class TestSurface:

    def test_grid(self):
        grid = np.linspace(0.0, 1.0, 51)
        surface = flm_surface(4.0, grid, grid, iterates=1)
        assert len(surface) == 51 * 51
        assert list(surface.columns) == ['x', 'alpha', 'value']
        assert (surface.loc[surface['x'] == 0.0, 'value'] == 0.0).all()
        classic = surface[surface['alpha'] == 0.0]
        assert np.allclose(classic['value'], 4.0 * classic['x'] * (1.0 - classic['x']), atol=1e-14)

    def test_three_iterates(self):
        grid = np.linspace(0.0, 1.0, 11)
        surface = flm_surface(4.0, grid, grid, iterates=3)
        row = surface[(surface['x'] == grid[3]) & (surface['alpha'] == grid[5])].iloc[0]
        q = lambda v: flm_eval(grid[5], 4.0, v)
        assert row['value'] == q(q(q(grid[3])))
