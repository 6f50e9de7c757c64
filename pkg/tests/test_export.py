"""Tests for CSV output, read-back and plot script generation."""

import os
import subprocess
import sys

import pytest

from dynamics import COMPLETED, fixed_points, iterate, OrbitConfig, OrbitStatus, OrbitStatusKind
from errors import ConfigurationError, DomainError
from export import (doublings_frame, emit_csv, emit_plot_script, fixed_points_frame, orbit_frame,
                    parse_config_line, plot_script_path, read_scan_csv, surface_frame)
from maps import MapFamily, MapSpec, Parameter
from scan import AxisSpec, bifurcation_scan, DoublingSequence, flm_surface, ScanRow

SETTINGS = {'command': 'bifurcation', 'family': 'flm', 'alpha': 0.5, 'parameter': 'lambda', 'steps': 3}


def read_lines(path):
    with open(path, encoding='utf-8') as f:
        return f.read().splitlines()


@pytest.fixture
def period_two_row():
    return ScanRow(param_value=3.25, attractor_samples=(0.5, 0.75), period=2, lyapunov=-1.5,
                   orbit_status=COMPLETED)


class TestEmitCsv:

    def test_single_row(self, tmp_path, period_two_row):
        path = tmp_path / 'scan.csv'
        emit_csv([period_two_row], str(path), SETTINGS)
        lines = read_lines(path)
        assert lines[0] == '# config: command=bifurcation family=flm alpha=0.5 parameter=lambda steps=3'
        assert lines[1] == 'param,period,lyapunov,status,samples'
        assert lines[2] == '3.25,2,-1.5,completed,0.5;0.75'
        assert len(lines) == 3

    def test_domain_violation_row(self, tmp_path):
        row = ScanRow(param_value=5.0, attractor_samples=(), period=None, lyapunov=None,
                      orbit_status=OrbitStatus(OrbitStatusKind.DOMAIN_VIOLATION, 17))
        path = tmp_path / 'scan.csv'
        emit_csv([row], str(path))
        assert read_lines(path)[2] == '5,undefined,undefined,domain_violation,'

    def test_round_trip_is_bit_exact(self, tmp_path):
        base = MapSpec(MapFamily.FLM, lam=4.5, alpha=0.5)
        rows = bifurcation_scan(base, AxisSpec(Parameter.LAMBDA, 4.5, 6.1, 9), OrbitConfig())
        path = tmp_path / 'scan.csv'
        emit_csv(rows, str(path), SETTINGS)
        settings, parsed = read_scan_csv(str(path))
        assert settings['alpha'] == '0.5'
        assert parsed == rows

    def test_deterministic_bytes(self, tmp_path):
        base = MapSpec(MapFamily.FLM, lam=4.5, alpha=0.5)
        axis = AxisSpec(Parameter.LAMBDA, 4.5, 6.1, 17)
        first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
        emit_csv(bifurcation_scan(base, axis, OrbitConfig()), str(first), SETTINGS)
        emit_csv(bifurcation_scan(base, axis, OrbitConfig()), str(second), SETTINGS)
        assert first.read_bytes() == second.read_bytes()

    def test_empty_rows(self, tmp_path):
        with pytest.raises(DomainError):
            emit_csv([], str(tmp_path / 'scan.csv'))
        assert not os.listdir(tmp_path)

    def test_missing_directory_leaves_nothing(self, tmp_path, period_two_row):
        path = tmp_path / 'missing' / 'scan.csv'
        with pytest.raises(ConfigurationError):
            emit_csv([period_two_row], str(path))
        assert not os.listdir(tmp_path)

    def test_overwrites_atomically(self, tmp_path, period_two_row):
        path = tmp_path / 'scan.csv'
        path.write_text('old contents\n')
        emit_csv([period_two_row], str(path))
        assert read_lines(path)[1].startswith('param,')
        assert os.listdir(tmp_path) == ['scan.csv']


class TestFrames:

    def test_orbit(self):
        orbit = iterate(MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=4.0), OrbitConfig(x0=0.75, transient=5, samples=3))
        frame = orbit_frame(orbit)
        assert list(frame['n']) == ['5', '6', '7']
        assert list(frame['x']) == ['0.75'] * 3

    def test_fixed_points_include_origin(self):
        frame = fixed_points_frame(fixed_points(0.0, 4.0), 0.0, 4.0)
        assert list(frame.columns) == ['x', 'residual', 'multiplier', 'stability']
        assert list(frame['x']) == ['0', '0.75']
        # the classic origin has multiplier lambda
        assert list(frame['multiplier']) == ['4', '-2']
        assert list(frame['stability']) == ['repelling', 'repelling']

    def test_fixed_points_origin_attracting_for_positive_alpha(self):
        frame = fixed_points_frame(fixed_points(0.5, 5.0), 0.5, 5.0)
        assert frame.iloc[0].tolist() == ['0', '0', '0', 'attracting']
        assert len(frame) == 3

    def test_doublings(self):
        frame = doublings_frame(DoublingSequence(bifurcation_params=(3.0, 3.449, 3.544), delta_estimates=(4.75,)))
        assert list(frame['k']) == ['1', '2', '3']
        assert list(frame['delta']) == ['undefined', '4.75', 'undefined']

    def test_surface(self):
        frame = surface_frame(flm_surface(4.0, [0.0, 0.5], [0.0], iterates=1))
        assert frame.values.tolist() == [['0', '0', '0'], ['0.5', '0', '1']]


class TestConfigLine:

    def test_parse(self):
        assert parse_config_line('# config: family=flm alpha=0.5 escape_bound=auto') == {
            'family': 'flm', 'alpha': '0.5', 'escape_bound': 'auto'}

    def test_not_a_config_line(self):
        assert parse_config_line('param,period') is None


class TestPlotScripts:

    @pytest.fixture
    def csv_path(self, tmp_path, period_two_row):
        path = tmp_path / 'fig3.csv'
        emit_csv([period_two_row], str(path), SETTINGS)
        return str(path)

    def test_bifurcation(self, csv_path):
        path = emit_plot_script(csv_path, 'bifurcation')
        assert path == plot_script_path(csv_path, 'bifurcation')
        script = open(path, encoding='utf-8').read()
        compile(script, path, 'exec')
        assert "frame['samples']" in script
        assert "ax.set_xlabel(settings.get('parameter', 'param'))" in script
        assert repr(os.path.abspath(csv_path)) in script

    def test_lyapunov_has_zero_line(self, csv_path):
        script = open(emit_plot_script(csv_path, 'lyapunov'), encoding='utf-8').read()
        compile(script, 'lyapunov', 'exec')
        assert 'axhline(0.0' in script

    def test_surface_domain(self, csv_path):
        script = open(emit_plot_script(csv_path, 'surface'), encoding='utf-8').read()
        compile(script, 'surface', 'exec')
        assert 'set_xlim(0.0, 1.0)' in script
        assert 'set_ylim(0.0, 1.0)' in script
        assert "set_ylabel('alpha')" in script

    def test_unsupported_kind(self, csv_path):
        with pytest.raises(ConfigurationError):
            emit_plot_script(csv_path, 'histogram')

    def test_missing_csv(self, tmp_path):
        with pytest.raises(ConfigurationError):
            emit_plot_script(str(tmp_path / 'nope.csv'), 'bifurcation')


class TestPlotScriptsRun:

    @pytest.fixture(autouse=True)
    def needs_matplotlib(self):
        pytest.importorskip('matplotlib')

    def run_script(self, script, tmp_path):
        image = tmp_path / 'figure.png'
        env = dict(os.environ, MPLBACKEND='Agg')
        result = subprocess.run([sys.executable, script, str(image)], env=env, capture_output=True, text=True,
                                timeout=120)
        assert result.returncode == 0, result.stderr
        assert image.stat().st_size > 0

    @pytest.mark.parametrize("kind", ['bifurcation', 'lyapunov'])
    def test_scan_plots(self, tmp_path, kind):
        base = MapSpec(MapFamily.CLASSIC_LOGISTIC, lam=2.8)
        rows = bifurcation_scan(base, AxisSpec(Parameter.LAMBDA, 2.8, 4.0, 13), OrbitConfig(x0=0.3))
        path = tmp_path / 'scan.csv'
        emit_csv(rows, str(path), SETTINGS)
        self.run_script(emit_plot_script(str(path), kind), tmp_path)

    def test_surface_plot(self, tmp_path):
        grid = [0.0, 0.25, 0.5, 0.75, 1.0]
        path = tmp_path / 'surface.csv'
        emit_csv(surface_frame(flm_surface(4.0, grid, grid, iterates=2)), str(path), {'command': 'surface'})
        self.run_script(emit_plot_script(str(path), 'surface'), tmp_path)
