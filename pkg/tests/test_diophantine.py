import math
from fractions import Fraction

import numpy as np
import pytest

from perfect_poisson.diophantine import (
    classify,
    continued_fraction,
    convergents,
    from_quotients,
    liouville_partial_sum,
    min_divisor,
    profile,
)
from perfect_poisson.models import GOLDEN


def _brute(alpha, N):
    return min(abs(a + alpha * b) for a in range(-N, N + 1) for b in range(-N, N + 1) if (a, b) != (0, 0))


def test_golden_quotients_are_ones():
    cf = continued_fraction(GOLDEN, 20)
    assert cf.quotients[0] == 0 and all(a == 1 for a in cf.quotients[1:])


def test_sqrt2_quotients():
    cf = continued_fraction(math.sqrt(2.0), 15)
    assert cf.quotients[:8] == [1, 2, 2, 2, 2, 2, 2, 2]


def test_exact_rational_terminates():
    cf = continued_fraction(Fraction(355, 113))
    assert cf.status == "rational" and from_quotients(cf.quotients) == Fraction(355, 113)


def test_float_rational_detected():
    assert continued_fraction(0.375).status == "rational"


def test_depth_limit():
    with pytest.raises(ValueError):
        continued_fraction(GOLDEN, 41)


def test_convergents_are_fibonacci_ratios():
    cf = continued_fraction(GOLDEN, 12)
    fib = [1, 1]
    while len(fib) < 20:
        fib.append(fib[-1] + fib[-2])
    for n, (p, q) in enumerate(convergents(cf.quotients)):
        if n >= 2:
            assert (p, q) == (fib[n - 1], fib[n])


def test_convergents_are_best_approximations():
    # no fraction with a smaller denominator is closer than a convergent
    cf = continued_fraction(GOLDEN, 10)
    for p, q in list(convergents(cf.quotients))[2:]:
        err = abs(q * GOLDEN - p)
        for b in range(1, q):
            a = round(b * GOLDEN)
            assert abs(b * GOLDEN - a) > err


@pytest.mark.parametrize("alpha", [GOLDEN, math.sqrt(2.0) - 1.0, math.pi - 3.0])
@pytest.mark.parametrize("N", [1, 3, 8])
def test_min_divisor_matches_brute_force(alpha, N):
    assert abs(min_divisor(alpha, N) - _brute(alpha, N)) < 1e-15


def test_min_divisor_argmin_and_monotone():
    best, k = min_divisor(GOLDEN, 8, with_argmin=True)
    assert abs(k[0] + GOLDEN * k[1]) == best
    vals = [min_divisor(GOLDEN, N) for N in range(1, 17)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        min_divisor(GOLDEN, 0)


def test_min_divisor_stable_under_perturbation():
    for N in (4, 8, 16):
        assert abs(min_divisor(GOLDEN + 1e-12, N) - min_divisor(GOLDEN, N)) < 2 * N * 1e-12


def test_classification_of_examples():
    assert classify(profile(GOLDEN)).label == "diophantine-like"
    assert classify(profile(math.sqrt(2.0) - 1.0)).label == "diophantine-like"
    assert classify(profile(Fraction(3, 7))).label == "rational"
    liou = profile(liouville_partial_sum(4), truncated=True)
    assert liou.status == "truncated"
    assert classify(liou).label == "liouville-like"


def test_profile_exponent_near_two_for_quadratic_irrational():
    prof = profile(GOLDEN)
    assert abs(prof.exponent_estimate - 2.0) < 0.05
    d = prof.to_dict()
    assert d["caveat"] and len(d["min_divisors"]) == 16
    assert np.isclose(d["min_divisors"]["8"], min_divisor(GOLDEN, 8))
