import math

import numpy as np
import pytest

from oracles import fd_bracket_grid, grid_values
from perfect_poisson.fourier import TrigPolynomial
from perfect_poisson.models import (
    GOLDEN,
    ConstantTorusModel,
    CosymplecticTorusModel,
    MappingTorusModel,
    ModelError,
    ProductModel,
    bracket,
    build_model,
    cat_mapping_torus,
    fibration_cosymplectic_t3,
    hamiltonian_vector_field,
    kronecker_cosymplectic_t3,
    leafwise_frame,
    monomial_bracket_symbol,
    pfaffian,
    symplectic_t2,
)

GALLERY = [symplectic_t2, fibration_cosymplectic_t3, kronecker_cosymplectic_t3, cat_mapping_torus]


@pytest.mark.parametrize("make", GALLERY)
def test_gallery_models_validate(make):
    assert make().validate() == []


@pytest.mark.parametrize("make", GALLERY)
def test_descriptor_roundtrip(make):
    m = make()
    again = build_model(m.descriptor())
    assert again.descriptor() == m.descriptor()


def test_product_descriptor_roundtrip():
    p = ProductModel(kronecker_cosymplectic_t3(), cat_mapping_torus(), name="kxc")
    again = build_model(p.descriptor())
    assert again.descriptor() == p.descriptor() and again.dim == 6 and again.rank == 4


def test_kronecker_bivector_and_frame():
    m = kronecker_cosymplectic_t3()
    # leaves spanned by d_x + alpha d_z and d_y
    span = np.array([[1.0, 0.0, GOLDEN], [0.0, 1.0, 0.0]])
    E = m.frame
    assert np.linalg.matrix_rank(np.vstack([E, span]), tol=1e-12) == 2
    M = np.outer(E[0], E[1]) - np.outer(E[1], E[0])
    assert np.abs(M - m.bivector).max() < 1e-14
    assert np.abs(m.theta @ m.bivector).max() < 1e-15
    assert abs(m.volume_coefficient() - 1.0) < 1e-14


def test_fibration_is_symplectic_in_fibre():
    P = fibration_cosymplectic_t3().bivector
    expect = np.zeros((3, 3))
    expect[0, 1], expect[1, 0] = 1.0, -1.0
    assert np.array_equal(P, expect)


def test_frame_normalization_for_scaled_bivector():
    P = np.zeros((4, 4))
    P[0, 2], P[2, 0] = 3.0, -3.0
    E = leafwise_frame(P)
    assert np.allclose(np.outer(E[0], E[1]) - np.outer(E[1], E[0]), P, atol=1e-14)


def test_pfaffian_squares_to_determinant():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 6))
    M = X - X.T
    assert math.isclose(pfaffian(M) ** 2, np.linalg.det(M), rel_tol=1e-10)


def test_invalid_models_rejected():
    assert ConstantTorusModel(np.array([[0.0, 1.0], [0.5, 0.0]])).validate()
    assert ConstantTorusModel(np.zeros((2, 2))).validate()
    bad = CosymplecticTorusModel(np.array([1.0, 0.0, 0.0]), np.zeros((3, 3)))
    assert any(c.name == "volume-form" for c in bad.validate())
    with pytest.raises(ModelError):
        CosymplecticTorusModel(np.zeros(2), np.zeros((2, 2)))
    with pytest.raises(ModelError):
        build_model({"family": "no-such-family"})


def test_mapping_torus_rejections():
    names = lambda A: {c.name for c in MappingTorusModel(np.array(A)).validate()}
    assert "hyperbolic" in names([[1, 1], [0, 1]])
    assert "det-one" in names([[2, 1], [1, 2]])
    assert "positive-eigenvalues" in names([[-2, -1], [-1, -1]])
    with pytest.raises(ModelError):
        MappingTorusModel(np.array([[2.5, 1], [1, 1]]))
    with pytest.raises(ModelError):
        build_model({"family": "mapping-torus", "A": [[2.5, 1], [1, 1]]})


def test_cat_map_eigendata():
    m = cat_mapping_torus()
    assert math.isclose(m.lam, (3 + math.sqrt(5)) / 2)
    A = m.A.astype(float)
    assert np.allclose(A @ m.v, m.v / m.lam, atol=1e-14)
    assert np.array_equal(m.transport, m.A.T)
    assert np.array_equal(m.transport @ m.transport_inv, np.eye(2, dtype=int))


def test_fractional_entries_parse():
    m = build_model({"family": "cosymplectic-torus", "theta": ["-1/2", 0, 1],
                     "eta": [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]})
    assert m.theta[0] == -0.5


@pytest.mark.parametrize("make", GALLERY[:3])
def test_bracket_on_monomials(make):
    m = make()
    rng = np.random.default_rng(1)
    for _ in range(10):
        a = tuple(int(x) for x in rng.integers(-3, 4, size=m.dim))
        b = tuple(int(x) for x in rng.integers(-3, 4, size=m.dim))
        br = bracket(m, TrigPolynomial.monomial(a), TrigPolynomial.monomial(b))
        expect = monomial_bracket_symbol(m.bivector, a, b)
        target = tuple(x + y for x, y in zip(a, b))
        assert abs(br[target] - expect) <= 1e-12 * max(1.0, abs(expect))


def test_bracket_on_grid_oracle():
    m = kronecker_cosymplectic_t3()
    rng = np.random.default_rng(2)
    f = TrigPolynomial.random_real(3, 3, rng, n_terms=4)
    g = TrigPolynomial.random_real(3, 3, rng, n_terms=4)
    rest = [0.37]
    err = np.abs(grid_values(bracket(m, f, g), 64, rest) - fd_bracket_grid(m.bivector, f, g, 64, rest)).max()
    assert err < 1e-6


def test_hamiltonian_field_applies_as_bracket():
    m = fibration_cosymplectic_t3()
    rng = np.random.default_rng(3)
    f = TrigPolynomial.random_real(3, 2, rng)
    g = TrigPolynomial.random_real(3, 2, rng)
    X = hamiltonian_vector_field(m, f)
    from perfect_poisson.fourier import partial_derivative
    applied = sum((X[j] * partial_derivative(g, j) for j in range(3)), TrigPolynomial.zero(3))
    assert applied.allclose(bracket(m, f, g), 1e-9)


def test_bracket_rejects_mapping_torus():
    with pytest.raises(ModelError):
        bracket(cat_mapping_torus(), TrigPolynomial.constant(3), TrigPolynomial.constant(3))
