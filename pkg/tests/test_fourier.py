import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grid_values
from perfect_poisson.fourier import (
    DimensionMismatch,
    TrigPolynomial,
    box_modes,
    directional_derivative,
    lattice_pairing,
    mean,
    partial_derivative,
)


def _random(dim, degree, seed, n_terms=5):
    return TrigPolynomial.random_real(dim, degree, np.random.default_rng(seed), n_terms=n_terms)


def test_constructors_and_inspection():
    c = TrigPolynomial.cos_mode((1, 2))
    assert c[(1, 2)] == 0.5 and c[(-1, -2)] == 0.5
    assert c.is_real() and c.degree == 2 and len(c) == 2
    s = TrigPolynomial.sin_mode((0, 1), 2.0)
    assert s[(0, 1)] == -1j and s[(0, -1)] == 1j
    assert TrigPolynomial.sin_mode((0, 0)).is_zero()
    assert TrigPolynomial.monomial((1, 0))[(1, 0)] == 1.0
    assert mean(TrigPolynomial.constant(3, 2.5)) == 2.5


def test_pruning_below_threshold():
    f = TrigPolynomial(2, {(1, 0): 1e-16, (0, 1): 1.0})
    assert len(f) == 1
    assert (f - f).is_zero()


def test_pointwise_values_match_closed_form():
    x = np.random.default_rng(0).uniform(size=(20, 2))
    f = TrigPolynomial.cos_mode((1, -3), 2.0) + TrigPolynomial.sin_mode((2, 1))
    expect = 2 * np.cos(2 * np.pi * (x[:, 0] - 3 * x[:, 1])) + np.sin(2 * np.pi * (2 * x[:, 0] + x[:, 1]))
    assert np.allclose(f(x), expect, atol=1e-13)


def test_product_matches_pointwise_product():
    f, g = _random(2, 3, 1), _random(2, 3, 2)
    vals = grid_values(f * g, 16)
    assert np.allclose(vals, grid_values(f, 16) * grid_values(g, 16), atol=1e-12)


def test_partial_derivative_matches_analytic():
    f = TrigPolynomial.sin_mode((3, 1))
    df = partial_derivative(f, 0)
    x = np.random.default_rng(1).uniform(size=(10, 2))
    assert np.allclose(df(x), 6 * np.pi * np.cos(2 * np.pi * (3 * x[:, 0] + x[:, 1])), atol=1e-12)
    with pytest.raises(IndexError):
        partial_derivative(f, 2)


def test_directional_derivative_is_linear_combination():
    f = _random(3, 3, 4)
    v = np.array([0.3, -1.0, 2.0])
    combo = sum((partial_derivative(f, j).scale(v[j]) for j in range(3)), TrigPolynomial.zero(3))
    assert directional_derivative(f, v).allclose(combo, 1e-11)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        TrigPolynomial.constant(2) + TrigPolynomial.constant(3)
    with pytest.raises(DimensionMismatch):
        directional_derivative(TrigPolynomial.constant(2), [1.0, 0.0, 0.0])


def test_norms():
    f = TrigPolynomial(2, {(1, 0): 3.0, (0, 0): -4.0})
    assert f.sup_norm_estimate() == 7.0
    assert math.isclose(f.sobolev_norm(0), 5.0)
    assert math.isclose(f.sobolev_norm(1), math.sqrt(2 * 9 + 16))


def test_lattice_pairing_is_mean_of_product():
    f, g = _random(2, 3, 5), _random(2, 3, 6)
    assert abs(lattice_pairing(f, g) - mean(f * g)) < 1e-12


def test_box_modes_count_and_order():
    m = box_modes(3, 2)
    assert m.shape == (125, 3)
    assert [tuple(r) for r in m] == sorted(tuple(r) for r in m)


def test_leibniz_and_associativity_to_roundoff():
    f, g, h = _random(3, 4, 7), _random(3, 4, 8), _random(3, 4, 9)
    lhs = partial_derivative(f * g, 1)
    rhs = partial_derivative(f, 1) * g + f * partial_derivative(g, 1)
    assert lhs.allclose(rhs, 1e-12 * lhs.sup_norm_estimate())
    assert ((f * g) * h).allclose(f * (g * h), 1e-13 * ((f * g) * h).sup_norm_estimate())


def test_lazy_symbols_commute_exactly():
    f = _random(3, 5, 10, n_terms=20)
    a = partial_derivative(partial_derivative(f, 0), 2)
    b = partial_derivative(partial_derivative(f, 2), 0)
    assert a == b


seeds = st.integers(min_value=0, max_value=10**6)


@settings(max_examples=40, deadline=None)
@given(seeds, seeds)
def test_product_commutes_exactly(s1, s2):
    f, g = _random(2, 4, s1), _random(2, 4, s2)
    assert f * g == g * f


@settings(max_examples=40, deadline=None)
@given(seeds, seeds, seeds)
def test_sum_commutes_exactly_and_distributes(s1, s2, s3):
    f, g, h = _random(2, 3, s1), _random(2, 3, s2), _random(2, 3, s3)
    assert f + g == g + f
    assert ((f + g) + h).allclose(f + (g + h), 1e-15 * (f.sup_norm_estimate() + g.sup_norm_estimate()
                                                        + h.sup_norm_estimate()))
    assert ((f + g) * h).allclose(f * h + g * h, 1e-13 * (f + g).sup_norm_estimate() * h.sup_norm_estimate())
    assert (f - f).is_zero()


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_random_real_is_real(s):
    f = TrigPolynomial.random_real(3, 3, np.random.default_rng(s), zero_mean=True)
    assert f.is_real(0.0) and mean(f) == 0
    x = np.random.default_rng(s).uniform(size=(5, 3))
    assert np.abs(f(x).imag).max() < 1e-12
