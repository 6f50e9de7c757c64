import os
import logging
import tempfile
from contextlib import contextmanager

RUN_LOGGER = 'fraclog'
ERROR_LOGGER = 'fraclog.errors'

def get_loggers():
    """
    Returns (run_logger, error_logger) without attaching any handler.
    Library modules call this at import time; the CLI calls setup_loggers.
    """
    return logging.getLogger(RUN_LOGGER), logging.getLogger(ERROR_LOGGER)

def setup_loggers(log_dir='logs'):
    """
    Sets up two loggers: one for run history and one for errors.
    Returns (run_logger, error_logger).
    """
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)

    # Formatter
    formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

    run_logger, error_logger = get_loggers()

    # Run Logger
    run_logger.setLevel(logging.INFO)
    # Prevent adding multiple handlers if setup is called multiple times
    if not run_logger.handlers:
        run_handler = logging.FileHandler(os.path.join(log_dir, 'fraclog.log'))
        run_handler.setFormatter(formatter)
        run_logger.addHandler(run_handler)
        # Also output to console (stderr, stdout is reserved for results)
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        run_logger.addHandler(console_handler)

    # Error Logger
    error_logger.setLevel(logging.ERROR)
    # errors are not repeated through the run logger's handlers
    error_logger.propagate = False
    if not error_logger.handlers:
        error_handler = logging.FileHandler(os.path.join(log_dir, 'errors.log'))
        error_handler.setFormatter(formatter)
        error_logger.addHandler(error_handler)
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        error_logger.addHandler(console_handler)

    return run_logger, error_logger

def format_number(value):
    """
    Serializes a float with 17 significant digits (round-trip exact for 64-bit floats).
    """
    return format(float(value), '.17g')

@contextmanager
def atomic_write(path):
    """
    Opens a temp file next to `path` for writing and renames it over `path`
    only when the block finishes without error.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.fraclog-', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
