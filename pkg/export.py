"""
Export Module (结果导出模块)

Writes results as CSV and generates matplotlib scripts that draw them:
1. Scan rows, orbits, fixed points, doublings and surfaces to CSV (emit_csv and *_frame helpers).
2. Reading scan CSVs back (read_scan_csv, parse_config_line).
3. Plot scripts for bifurcation, Lyapunov and surface CSVs (emit_plot_script).

Every CSV starts with one `# config: key=value ...` line echoing the settings
that produced it. Floats carry 17 significant digits; undefined values are
written as `undefined`. Files are replaced atomically.
"""

import os
import re
from typing import List

import pandas as pd

from dynamics import classify_multiplier, OrbitStatus, OrbitStatusKind
from errors import ConfigurationError, DomainError
from maps import flm_derivative
from scan import ScanRow
from utils import atomic_write, format_number, get_loggers

run_logger, error_logger = get_loggers()

UNDEFINED = 'undefined'
SAMPLE_SEPARATOR = ';'
SCAN_COLUMNS = ['param', 'period', 'lyapunov', 'status', 'samples']

# "# config: command=bifurcation family=flm alpha=0.5 ..."
_CONFIG_LINE = re.compile(r'^#\s*config:\s*(.*)$')
_CONFIG_ITEM = re.compile(r'([A-Za-z_][\w-]*)=(\S*)')

PLOT_KINDS = ('bifurcation', 'lyapunov', 'surface')


def _cell(value):
    if value is None:
        return UNDEFINED
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def scan_frame(rows):
    records = []
    for row in rows:
        records.append({
            'param': format_number(row.param_value),
            'period': _cell(row.period),
            'lyapunov': _cell(row.lyapunov),
            'status': str(row.orbit_status),
            'samples': SAMPLE_SEPARATOR.join(format_number(v) for v in row.attractor_samples),
        })
    return pd.DataFrame.from_records(records, columns=SCAN_COLUMNS)


def orbit_frame(orbit):
    """Recorded points with their absolute iteration index n."""
    start = orbit.transient
    return pd.DataFrame({
        'n': [str(start + i) for i in range(len(orbit.points))],
        'x': [format_number(v) for v in orbit.points],
    })


def fixed_points_frame(fixed_point_set, alpha, lam):
    records = []
    if fixed_point_set.includes_origin:
        # x = 0 solves Q(x) = x for every alpha and lambda
        multiplier = flm_derivative(alpha, lam, 0.0)
        records.append({'x': '0', 'residual': '0', 'multiplier': format_number(multiplier),
                        'stability': classify_multiplier(multiplier).value})
    for root in fixed_point_set.roots:
        records.append({
            'x': format_number(root.x),
            'residual': format_number(root.residual),
            'multiplier': format_number(root.multiplier),
            'stability': root.stability.value,
        })
    return pd.DataFrame.from_records(records, columns=['x', 'residual', 'multiplier', 'stability'])


def doublings_frame(sequence):
    """One row per doubling k; delta_k is defined for interior k only."""
    params = sequence.bifurcation_params
    records = []
    for k, param in enumerate(params, start=1):
        delta = sequence.delta_estimates[k - 2] if 2 <= k <= len(params) - 1 else None
        records.append({'k': str(k), 'param': format_number(param), 'delta': _cell(delta)})
    return pd.DataFrame.from_records(records, columns=['k', 'param', 'delta'])


def surface_frame(surface):
    return pd.DataFrame({column: [format_number(v) for v in surface[column]] for column in ('x', 'alpha', 'value')})


def format_config_line(settings):
    items = ' '.join(f'{key}={_cell(value)}' for key, value in settings.items())
    return f'# config: {items}'


def parse_config_line(line):
    """Returns the key/value pairs of a `# config:` line (values stay strings), or None."""
    match = _CONFIG_LINE.match(line.strip())
    if not match:
        return None
    return dict(_CONFIG_ITEM.findall(match.group(1)))


def emit_csv(rows, path, settings=None):
    """
    Writes `rows` to `path`. `rows` is a list of ScanRow or an already
    formatted DataFrame (see the *_frame helpers). `settings` feeds the
    leading `# config:` line.
    """
    if isinstance(rows, pd.DataFrame):
        frame = rows
    else:
        rows = list(rows)
        if rows and not all(isinstance(row, ScanRow) for row in rows):
            raise ConfigurationError("emit_csv takes ScanRow lists or DataFrames", field='rows')
        frame = scan_frame(rows)
    if frame.empty:
        raise DomainError(f"nothing to write to {path}", field='output')

    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise ConfigurationError(f"output directory {directory} does not exist", field='output')

    with atomic_write(path) as f:
        f.write(format_config_line(settings or {}) + '\n')
        frame.to_csv(f, index=False, lineterminator='\n')
    run_logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _read_config(path):
    with open(path, 'r', encoding='utf-8') as f:
        first = f.readline()
    settings = parse_config_line(first)
    if settings is None:
        raise ConfigurationError(f"{path} has no '# config:' line", field='input')
    return settings


def read_scan_csv(path):
    """
    Reads a scan CSV back into (settings, rows). The orbit step of a failed
    row is not stored, so statuses come back without it.
    """
    settings = _read_config(path)
    frame = pd.read_csv(path, skiprows=1, dtype=str, keep_default_na=False)
    if list(frame.columns) != SCAN_COLUMNS:
        raise ConfigurationError(f"{path} is not a scan CSV (columns {list(frame.columns)})", field='input')

    rows: List[ScanRow] = []
    for record in frame.itertuples(index=False):
        samples = tuple(float(v) for v in record.samples.split(SAMPLE_SEPARATOR)) if record.samples else ()
        rows.append(ScanRow(
            param_value=float(record.param),
            attractor_samples=samples,
            period=None if record.period == UNDEFINED else int(record.period),
            lyapunov=None if record.lyapunov == UNDEFINED else float(record.lyapunov),
            orbit_status=OrbitStatus(OrbitStatusKind(record.status)),
        ))
    return settings, rows


_PLOT_HEADER = '''"""Plots {csv_name}. Generated by fraclog; needs pandas and matplotlib."""
import sys

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

CSV = {csv_path!r}

with open(CSV, encoding='utf-8') as f:
    config_line = f.readline().strip().lstrip('#').strip()
frame = pd.read_csv(CSV, skiprows=1, dtype=str, keep_default_na=False)
settings = dict(item.split('=', 1) for item in config_line.split()[1:] if '=' in item)
'''

_PLOT_BODIES = {
    'bifurcation': '''
xs, ys = [], []
for param, samples in zip(frame['param'], frame['samples']):
    if samples:
        values = [float(v) for v in samples.split(';')]
        xs.extend([float(param)] * len(values))
        ys.extend(values)

fig, ax = plt.subplots(figsize=(10, 6))
ax.plot(xs, ys, ',k', alpha=0.5)
ax.set_xlabel(settings.get('parameter', 'param'))
ax.set_ylabel('x')
ax.set_title(' '.join(f'{k}={v}' for k, v in settings.items() if k in ('family', 'alpha', 'lambda')))
''',
    'lyapunov': '''
params = frame['param'].astype(float)
exponents = pd.to_numeric(frame['lyapunov'].replace('undefined', 'nan'), errors='coerce')

fig, ax = plt.subplots(figsize=(10, 4))
ax.plot(params, exponents, '-b', linewidth=0.7)
ax.axhline(0.0, color='k', linewidth=0.8)
ax.set_xlabel(settings.get('parameter', 'param'))
ax.set_ylabel('Lyapunov exponent')
''',
    'surface': '''
data = frame.astype(float).pivot(index='alpha', columns='x', values='value')
X, A = np.meshgrid(data.columns.values, data.index.values)

fig = plt.figure(figsize=(8, 6))
ax = fig.add_subplot(projection='3d')
ax.plot_surface(X, A, data.values, cmap='viridis')
ax.set_xlim(0.0, 1.0)
ax.set_ylim(0.0, 1.0)
ax.set_xlabel('x')
ax.set_ylabel('alpha')
ax.set_zlabel('Q(x)')
''',
}

_PLOT_FOOTER = '''
if len(sys.argv) > 1:
    fig.savefig(sys.argv[1], dpi=150)
else:
    plt.show()
'''


def plot_script_path(csv_path, kind):
    stem, _ = os.path.splitext(csv_path)
    return f'{stem}_{kind}_plot.py'


def emit_plot_script(csv_path, kind):
    """
    Writes a standalone matplotlib script next to `csv_path` that plots it.
    Running it with an image path saves the figure instead of showing it.
    """
    if kind not in PLOT_KINDS:
        raise ConfigurationError(f"unsupported plot kind '{kind}', expected one of {PLOT_KINDS}", field='kind')
    if not os.path.isfile(csv_path):
        raise ConfigurationError(f"{csv_path} does not exist", field='output')

    script = (_PLOT_HEADER.format(csv_name=os.path.basename(csv_path), csv_path=os.path.abspath(csv_path))
              + _PLOT_BODIES[kind] + _PLOT_FOOTER)
    path = plot_script_path(csv_path, kind)
    with atomic_write(path) as f:
        f.write(script)
    run_logger.info(f"Wrote {kind} plot script {path}")
    return path
