import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    SECRET_KEY = os.environ.get('SECRET_KEY') or 'dev-secret-key-change-in-production'
    JSON_SORT_KEYS = False

    # Reproducibility
    SEED = int(os.environ.get('ORBA_SEED') or 42)

    # Tolerances
    TOL_CONE = float(os.environ.get('ORBA_TOL_CONE') or 1e-9)
    TOL_LP = float(os.environ.get('ORBA_TOL_LP') or 1e-9)
    TOL_NUM = float(os.environ.get('ORBA_TOL_NUM') or 1e-8)
    # N(x) below this counts as zero in ratio statistics
    RATIO_GUARD = 1e-12

    # LP kernel
    LP_MAX_VARIABLES = int(os.environ.get('ORBA_LP_MAX_VARIABLES') or 512)
    LP_MAX_ITERATIONS = int(os.environ.get('ORBA_LP_MAX_ITERATIONS') or 20000)

    # Sampled constants
    SAFETY_FACTOR = float(os.environ.get('ORBA_SAFETY_FACTOR') or 1.05)
    SCAN_SAMPLES = int(os.environ.get('ORBA_SCAN_SAMPLES') or 200)

    # Covers
    IDEAL_DELTA = float(os.environ.get('ORBA_IDEAL_DELTA') or 1e-9)
    KOETHE_REFERENCE_RATIO = float(os.environ.get('ORBA_KOETHE_REFERENCE_RATIO') or 0.5)
    MERGED_GRID_STEP = float(os.environ.get('ORBA_MERGED_GRID_STEP') or 1e-3)

    # Reports
    REPORT_SCHEMA_VERSION = '1.1'
    DATABASE_PATH = os.environ.get('DATABASE_PATH') or 'orba_reports.db'

    # Logging
    LOG_DIR = os.environ.get('LOG_DIR') or 'logs'
    LOGGING_LEVEL = os.environ.get('LOGGING_LEVEL') or 'INFO'
