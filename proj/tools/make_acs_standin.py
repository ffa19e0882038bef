#!/usr/bin/env python3
"""Regenerate fixtures/acs_income.csv.

The published ACS income subsample (214 men, 217 women, income in thousands
of dollars) is not redistributed here. This script builds a deterministic
stand-in with the same group sizes, group means (2 dp) and standard
deviations (3 dp). Each group's shape is a Tukey g-and-h quantile profile.
The (g, h) pairs were fitted once so that the within-group bootstrap of the
difference in means has skewness 0.15 and excess kurtosis 0.08, and the
pooled bootstrap has excess kurtosis 0.08. They are frozen below.

Usage: python3 tools/make_acs_standin.py > fixtures/acs_income.csv
"""

import numpy as np
from scipy.stats import norm

N_MALE, N_FEMALE = 214, 217
MEAN_MALE, MEAN_FEMALE = 50.96, 32.16
SD_MALE, SD_FEMALE = 62.848, 36.920
SHAPE_MALE = (1.00370362, 0.06117498)
SHAPE_FEMALE = (1.15310455, 0.03107314)


def g_and_h_profile(g, h, n):
    z = norm.ppf((np.arange(n) + 0.5) / n)
    return np.expm1(g * z) / g * np.exp(h * z * z / 2)


def group(shape, n, mean, sd):
    x = g_and_h_profile(*shape, n)
    x = (x - x.mean()) / x.std(ddof=1) * sd + mean
    x = np.round(x, 2)
    # absorb the rounding residual so the mean is exact at 2 dp
    x[n // 2] += round(round(mean * n, 2) - x.sum(), 2)
    return np.abs(np.round(x, 2))


def main():
    male = group(SHAPE_MALE, N_MALE, MEAN_MALE, SD_MALE)
    female = group(SHAPE_FEMALE, N_FEMALE, MEAN_FEMALE, SD_FEMALE)
    rows = [(v, "Male") for v in male] + [(v, "Female") for v in female]
    order = np.random.default_rng(2010).permutation(len(rows))
    print("Income,Sex")
    for i in order:
        v, sex = rows[i]
        print(f"{v:.2f},{sex}")


if __name__ == "__main__":
    main()
