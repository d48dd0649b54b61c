"""Frozen constants and regression data.

Where a verified inequality hides an absolute constant, the value used here
was calibrated once by a seeded oracle run (rerunnable via
``python -m boundlab.calibrate``, seed 20260808) and is treated as a
regression datum from then on.
"""

# Doubling budget for Bohr sets: |B(S, 2rho)| <= C0^{|S|} |B(S, rho)|.
# Exhaustive scans over seeded random frequency sets (|S| <= 5, N = 1e4,
# 100 random radii) kept every observed ratio below 4^{|S|}; 5 adds margin.
BOHR_DOUBLING_C0 = 5.0

# Default regularity constant accepted by the regular-radius search.
REGULARITY_KAPPA = 100.0

# Scan threshold: a scale ladder passes when some scale has correlation
# >= C * measure^2. Low-resolution brute force on seeded rectangle-union
# corpora saw minima above 0.5 * measure^2, so 0.01 leaves wide margin.
FKW_SCAN_CONSTANT = 0.01

# Hoeffding tail constants (amplitude, exponent rate) in
# P(|X - EX| >= lam * sqrt(sum (b_i-a_i)^2)) <= amplitude * exp(-rate * lam^2).
HOEFFDING_AMPLITUDE = 2.0
HOEFFDING_RATE = 2.0

# Exponent rate for the Gaussian tail utility; exposed rather than fixed.
GAUSSIAN_TAIL_C = 0.5

# Domination constant: empirical sup of a Gaussian process <= C_D * entropy sum.
# `calibrate dudley` (200 random PSD specs, n <= 32, diameter normalized to 2)
# observed a maximum ratio of 0.5977; frozen at 1.0.
DUDLEY_DOMINATION_CD = 1.0

# Random character subsets at n=256, p=4, inclusion n^{-1/2}, 50 seeded draws:
# `calibrate lambdap` observed median 1.3083, max 1.4786 (full set: 4.0000).
LAMBDA_P_MEDIAN_CAP = 2.0

# Minimum pairwise orbit separation (ell-infinity, torus) over a 101-point
# probe of [1, 2]; `calibrate separation` observed 0.294688 (J0=2) and
# 0.249707 (J0=3), frozen slightly below as regression floors.
SEPARATION_FLOOR = {
    (2, 0.25): 0.2946,
    (3, 0.25): 0.2497,
}

# Certified inf-sup oracle at J0=2, ratio 1/3, eps 0.5, 1000 x-samples
# (`calibrate infsup`): int_f = 0.4960, int_F = 0.0000, ratio = 0.0000 over
# the 65522-point certified net. Recorded as the seeded reference datum.
INF_SUP_REFERENCE_RATIO = 0.0

# Greedy net sizes for the orbit family at delta = 0.1, ratio 1/3
# (`calibrate entropy`): exact observed values, used as regression ceilings.
ORBIT_ENTROPY_NET = {1: 10, 2: 183, 3: 4543}
