from errors import ConfigurationError

def load_properties(filepath):
    props = {}
    try:
        with open(filepath, 'r') as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith('#') and '=' in line:
                    key, value = line.split('=', 1)
                    props[key.strip()] = value.strip()
    except FileNotFoundError:
        raise ConfigurationError(f"{filepath} not found", field='config')
    return props

# Quadrature (Riemann-Liouville oracle)
QUAD_NODE_BUDGET = 20000
QUAD_TARGET_REL_ERROR = 1e-9
QUAD_MAX_ALPHA = 5.0
SEMIGROUP_GRID_NODES = 2048

# Map families
MAX_ALPHA = 5.0
DEFAULT_ALPHA = 0.5  # semi-logistic map when --alpha is not given for flm

# Orbits
X0 = 0.5
TRANSIENT = 2000
SAMPLES = 400
MAX_ORBIT_LENGTH = 10 ** 8
ESCAPE_FACTOR = 10.0  # escape bound = ESCAPE_FACTOR * (1 + alpha/2)

# Period detection
MAX_PERIOD = 128
PERIOD_TOL = 1e-9

# Fixed points of the FLM
FIXED_POINT_GRID_NODES = 4096
FIXED_POINT_RESIDUAL = 1e-12
STABILITY_MARGIN = 1e-9

# Scans (defaults reproduce the alpha=1/2 bifurcation diagram)
SCAN_LAMBDA_MIN = 4.5
SCAN_LAMBDA_MAX = 6.1
SCAN_STEPS = 1601
WORKERS = 1
# default lambda ranges per family; ricker and hassel need explicit bounds
SCAN_LAMBDA_RANGES = {
    'flm': (SCAN_LAMBDA_MIN, SCAN_LAMBDA_MAX),
    'logistic': (2.8, 4.0),
}
SLICE_ALPHA_MIN = 0.0
SLICE_ALPHA_MAX = 1.0

# Doubling search
BISECTION_TOL = 1e-6
REFINE_FACTOR = 8
MAX_K = 3

# Surface grids
SURFACE_LAMBDA = 4.0
SURFACE_STEPS = 51
SURFACE_ITERATES = 1

# Logging
LOG_DIR = 'logs'

# Keys a --config properties file may override, with their parsers
OVERRIDABLE = {
    'x0': float,
    'transient': int,
    'samples': int,
    'escape_bound': float,
    'max_period': int,
    'tol': float,
    'steps': int,
    'workers': int,
    'max_k': int,
    'node_budget': int,
    'target_rel_error': float,
}

def load_overrides(filepath):
    """
    Parse a .properties file into typed default overrides.
    读取配置文件中的默认值覆盖。
    """
    overrides = {}
    for key, value in load_properties(filepath).items():
        key = key.replace('-', '_')
        parser = OVERRIDABLE.get(key)
        if parser is None:
            raise ConfigurationError(f"unknown key '{key}' in {filepath}", field='config')
        try:
            overrides[key] = parser(value)
        except ValueError:
            raise ConfigurationError(f"bad value '{value}' for '{key}' in {filepath}", field='config')
    return overrides
