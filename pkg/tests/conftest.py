"""Shared oracles for the test suite.

The oracles here are deliberately independent of the library's own interval
code: plain-float bisection, mpmath high-precision evaluation, and brute
enumeration.  Expected values asserted in the tests were computed with these
and frozen.
"""

import math

import mpmath as mp
import pytest


def bisect_root(f, lo: float, hi: float, steps: int = 200) -> float:
    """Plain bisection oracle; f(lo) and f(hi) must straddle zero."""
    flo = f(lo)
    if flo > 0:
        lo, hi = hi, lo
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mp_growth(t, dps: int = 60):
    with mp.workdps(dps):
        return mp.e ** mp.mpf(t) - 1


def mp_growth_pow(c, e: int, dps: int = 60):
    """F^e(c) at high precision; e < 0 iterates ln(1 + .)."""
    with mp.workdps(dps):
        v = mp.mpf(c)
        if e >= 0:
            for _ in range(e):
                v = mp.e ** v - 1
        else:
            for _ in range(-e):
                v = mp.log(1 + v)
        return v


def mp_growth_inv(t, k: int, dps: int = 60):
    with mp.workdps(dps):
        v = mp.mpf(t)
        for _ in range(k):
            v = mp.log(1 + v)
        return v


@pytest.fixture(scope="session")
def const1_height_oracle() -> float:
    """Root of e^t = t + 2 by bisection (endpoint height of the all-ones tail)."""
    return bisect_root(lambda t: math.exp(t) - t - 2.0, 0.5, 2.0)


def assert_encloses(interval, value: float, slack: float = 1e-12) -> None:
    assert interval.lo - slack <= value <= interval.hi + slack, \
        f"{value} outside {interval}"
