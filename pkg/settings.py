DEFAULT_WINDOW = 2
GRID_POINTS = 1001
REFINE_TOL = 1e-9
DISTRIBUTION_TOL = 1e-9
PROBABILITY_DECIMALS = 6
ACF_MAX_LAG = 10
WHITENESS_MIN_LENGTH = 8

DEBUG = False
DEBUG_INFERENCE = False
DEBUG_ESTIMATION = False
DEBUG_ENGINE = False

try:
	from settings_local import *
except ImportError:
	pass
