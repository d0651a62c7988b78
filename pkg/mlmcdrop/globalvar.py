# This file contains global attributes used throughout mlmcdrop

DEFAULT_GRID_POINTS = 101
DEFAULT_DOMAIN = (0.0, 1.0)
DEFAULT_STOPPING_THRESHOLD = 0.1
DEFAULT_CONFIDENCE = 0.99
DEFAULT_MIN_SAMPLES = 2
SEED_ENV_VAR = "MLMCDROP_SEED"
CSV_SCHEMA_VERSION = "1"
WEIGHT_FILE_MAGIC = "# mlmcdrop weights v1"
