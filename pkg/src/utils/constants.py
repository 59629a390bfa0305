"""
Shared numerical tolerances and process exit codes.
"""
EXIT_SUCCESS = 0
EXIT_FAILED = 1
EXIT_CONFIG_ERROR = 2

# eigenvalues at or below this are treated as zero
ZERO_EIGENVALUE = 1e-12
# raw eigenvalues below -NEGATIVE_EIGEN_TOL * mu_1 mean the kernel is broken
NEGATIVE_EIGEN_TOL = 1e-8
SYMMETRY_TOL = 1e-10

# a centered column whose mean square falls below this is degenerate
DEGENERATE_VARIANCE = 1e-12

GP_JITTER_START = 1e-8
GP_JITTER_MAX = 1e-4

ENV_WORKERS = "BOOSTDAG_WORKERS"
