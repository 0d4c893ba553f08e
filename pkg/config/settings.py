import os
from dotenv import load_dotenv
from pathlib import Path

# Load environment variables
load_dotenv()

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent

# Worker cap for grid scans (validated by toeplitz.grid.resolve_threads)
THREADS = os.getenv('TOEPLITZ_SPECTRA_THREADS', str(os.cpu_count() or 1))

# Logging
LOG_DIR = Path(os.getenv('TOEPLITZ_SPECTRA_LOG_DIR', BASE_DIR / 'logs'))
LOG_LEVEL = os.getenv('TOEPLITZ_SPECTRA_LOG_LEVEL', 'INFO')

# Capacitance regularisation: outer matrix size M and central block size
DEFAULT_OUTER_SIZE = int(os.getenv('TOEPLITZ_SPECTRA_OUTER_SIZE', 100))
DEFAULT_BLOCK_SIZE = int(os.getenv('TOEPLITZ_SPECTRA_BLOCK_SIZE', 60))

# Numerical tolerances shared across modules
ROOT_RESIDUAL_TOL = 1e-8
CONFLUENCE_TOL = 1e-7
TIE_TOL = 1e-10
ON_CURVE_TOL = 1e-6
LIMIT_SET_THRESHOLD = 1e-3
CURVE_SAMPLES = 4096
