"""Numerical defaults for shell-gsm."""

import os

# Radial integrator (adaptive RK4(5))
DEFAULT_RTOL = float(os.getenv("SHELLGSM_RTOL", "1e-10"))
DEFAULT_ATOL = float(os.getenv("SHELLGSM_ATOL", "1e-12"))
DEFAULT_MAX_STEPS = 1_000_000
DEFAULT_ODE_METHOD = "RK45"

# Central-difference step for profiles without analytic derivatives,
# as a fraction of the segment thickness
FD_STEP_FRACTION = 1e-6

# A denominator is vanishing below this fraction of its largest additive term
VANISHING_RATIO = 1e-12

# Composition: reject M with an estimated condition number above this
MAX_CONDITION = 1e12

# Antenna GSM and SSO frequencies must agree within this many Hz
FREQUENCY_MATCH_HZ = 1.0

# Largest truncation degree accepted without --lmax-override
LMAX_CAP = 35

# Pattern cuts
DEFAULT_CUT_RESOLUTION_DEG = 1.0

# Worker threads for frequency and sweep points
DEFAULT_THREADS = int(os.getenv("SHELLGSM_THREADS", "1"))

# GSM interchange format
GSM_FORMAT_VERSION = 1
MODE_ORDERING = "canonical-v1"

# Staircase convergence: each refinement may exceed the coarser error by this factor
STAIRCASE_JITTER = 1.1
# Graded-shell staircase, n = 20 layers: max |dS| regression value at this frequency
STAIRCASE_BASELINE_HZ = 3.5e9
STAIRCASE_N20_BASELINE = 1.48e-3
STAIRCASE_BASELINE_RTOL = 0.2

# Random trials in the full validation run (the quick run uses fewer)
FULL_RANDOM_STACKS = 50
FULL_SPLIT_RADII = 5
