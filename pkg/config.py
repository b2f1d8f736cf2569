import os

# Library Configuration
API_VERSION = "1.0.0"
LOG_LEVEL = os.environ.get("KAPITZA_LOG_LEVEL", "INFO")

# Regime thresholds
DEEP_WELL_EPSILON = 0.1  # mu~ <= eps * B^(1/2)
TURNING_POINT_XTOL = 1e-12  # absolute, in phi

# Fourier oracle
MIN_FOURIER_CUTOFF = 48
FOURIER_CUTOFF_STEP = 8  # K -> K+8 convergence test
EIGEN_CONVERGENCE_TOL = 1e-10  # absolute
ORACLE_LEVELS = 16  # eigenvalues reported per sector by default
EIGENFUNCTION_GRID_MIN = 1024  # points on the internal normalization grid
NODE_AMPLITUDE_FLOOR = 1e-9  # relative to max |psi|
NODE_GRID_START = 512
NODE_GRID_MAX = 65536

# Monodromy integration
ODE_TOLERANCE = 1e-12  # rtol and atol
BAND_EDGE_TOL = 1e-8  # |half trace -/+ 1| treated as a band edge

# High precision oracle
HIGH_PRECISION_DPS = 60  # decimal digits for Sturm bisection

# Symbolic generation
MAX_RICCATI_ORDER = 9
SIPS_MAX_ORDER = 3

# Contour quadrature
CONTOUR_R_MIN = 1e-3
CONTOUR_RADIUS = 1.0
RECTANGLE_HALF_HEIGHT = 2.0
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-13
QUAD_LIMIT = 200

# WKB action
WKB_EPSABS = 1e-10

# Tunneling
TUNNELING_ACTION = "leading"  # default of --action: leading, per_well, semiclassical
TUNNELING_ACTIONS = ("leading", "per_well", "semiclassical")

# Command line
DEFAULT_THREADS = int(os.environ.get("KAPITZA_THREADS", "4"))
DEFAULT_FORMAT = "csv"
DEFAULT_SAMPLES = 201
OUTPUT_FORMATS = ("csv", "json")

# Cache Configuration
CACHE_URL = os.environ.get("KAPITZA_CACHE_URL", "")  # empty disables the result cache
MAX_CACHE_ENTRIES = 10000

# Wavefunctions
WELL_SIPS_ORDER = 2  # default truncation in (2 B^(1/2))^(-l)
BARRIER_ORDER = 6  # default integrand order of the barrier exponent
PRINTED_CHECK_ORDER = 7
OVERLAP_FACTOR = 4.0  # overlap annulus mu~/B^(1/2) < sin^2 < OVERLAP_FACTOR * mu~/B^(1/2)
MONODROMY_STEPS = 2001  # samples on the path rho -> rho + i pi
