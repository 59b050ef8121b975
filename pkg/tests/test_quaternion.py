"""
Tests for the quaternion algebra: scalar value types and vectorized kernels
"""

import numpy as np
import pytest

from app.exceptions import InvalidInputError
from app.models.quaternion import (
    AXIS_I,
    AXIS_J,
    AXIS_K,
    ONE,
    ComplexPair,
    I,
    J,
    K,
    PureUnitQuaternion,
    Quaternion,
    UNIT_I,
    conj,
    embed_cj,
    exp_pure,
    from_complex_pair,
    inner3,
    involution,
    mul,
    normalize_axes,
    polar_product,
    pure,
    qconj,
    qexp,
    qinvolution,
    qmul,
    qnorm,
    to_complex_pair,
)
from tests.conftest import TestData, assert_close, random_axes


@pytest.mark.unit
@pytest.mark.algorithm
class TestHamiltonProduct:
    """Multiplication table and algebraic laws"""

    def test_basis_table(self):
        """Test i² = j² = k² = ijk = -1 and the cyclic products"""
        minus_one = -ONE
        assert (I * I).isclose(minus_one)
        assert (J * J).isclose(minus_one)
        assert (K * K).isclose(minus_one)
        assert (I * J * K).isclose(minus_one)

        assert (I * J).isclose(K)
        assert (J * K).isclose(I)
        assert (K * I).isclose(J)
        assert (J * I).isclose(-K)

        print("✅ Basis multiplication table holds")

    def test_associative_not_commutative(self, rng):
        """Test associativity on random arrays and non-commutativity"""
        p, q, r = (rng.standard_normal((500, 4)) for _ in range(3))

        assert_close(qmul(qmul(p, q), r), qmul(p, qmul(q, r)), TestData.ALGEBRA_TOL, "associativity")
        assert not np.allclose(qmul(p, q), qmul(q, p))

        print("✅ Product is associative and not commutative")

    def test_norm_is_multiplicative(self, rng):
        """Test |pq| = |p||q|"""
        p, q = rng.standard_normal((2, 200, 4))
        assert_close(qnorm(qmul(p, q)), qnorm(p) * qnorm(q), TestData.ALGEBRA_TOL, "norm")

        print("✅ Norm is multiplicative")

    def test_conjugate_reverses_products(self, rng):
        """Test conj(pq) = conj(q) conj(p) and q conj(q) = |q|²"""
        p, q = rng.standard_normal((2, 200, 4))

        assert_close(qconj(qmul(p, q)), qmul(qconj(q), qconj(p)), TestData.ALGEBRA_TOL, "conj")
        squared = qmul(q, qconj(q))
        assert_close(squared[:, 0], qnorm(q) ** 2, TestData.ALGEBRA_TOL, "q conj(q)")
        assert np.max(np.abs(squared[:, 1:])) < 1e-12 * np.max(qnorm(q) ** 2)

        print("✅ Conjugation reverses products")

    def test_scalar_and_array_paths_agree(self, rng):
        """Test mul/conj on value types match the array kernels"""
        a, b = rng.standard_normal((2, 4))
        p, q = Quaternion.from_array(a), Quaternion.from_array(b)

        assert np.allclose(mul(p, q).to_array(), mul(a, b))
        assert np.allclose(conj(p).to_array(), conj(a))
        assert np.allclose((2.0 * p).to_array(), 2.0 * a)

        print("✅ Value types and kernels agree")


@pytest.mark.unit
@pytest.mark.algorithm
class TestInvolutionsAndExponential:
    """Involutions, exponential of pure quaternions and the polar product"""

    def test_involution_matches_definition(self, rng):
        """Test involution(q, mu) = -mu q mu for the three basis axes"""
        q = rng.standard_normal((100, 4))
        for name, axis in (("i", I), ("j", J), ("k", K)):
            mu = axis.to_array()
            expected = -qmul(qmul(mu, q), mu)
            assert_close(qinvolution(q, name), expected, TestData.EXACT_TOL, f"involution {name}")

        print("✅ Involutions match -mu q mu")

    def test_involution_rejects_unknown_axis(self):
        """Test an unknown involution axis is rejected"""
        with pytest.raises(InvalidInputError, match="Involution axis"):
            qinvolution(np.zeros(4), "x")

        print("✅ Unknown involution axis rejected")

    def test_scalar_involution(self):
        """Test the value-type involution on a single quaternion"""
        q = Quaternion(1.0, 2.0, 3.0, 4.0)
        assert involution(q, "i") == Quaternion(1.0, 2.0, -3.0, -4.0)
        assert involution(q, "k") == Quaternion(1.0, -2.0, -3.0, 4.0)

        print("✅ Scalar involution")

    def test_pure_unit_squares_to_minus_one(self, rng):
        """Test mu² = -1 for random unit axes"""
        mu = pure(random_axes(rng, 50))
        squared = qmul(mu, mu)
        assert_close(squared, np.tile([-1.0, 0.0, 0.0, 0.0], (50, 1)), TestData.EXACT_TOL, "mu²")

        print("✅ Unit pure quaternions square to -1")

    def test_exponential_is_unit_and_additive(self, rng):
        """Test |exp(mu t)| = 1 and exp(mu s) exp(mu t) = exp(mu (s + t))"""
        mu = random_axes(rng, 100)
        s, t = rng.uniform(-np.pi, np.pi, (2, 100))

        assert_close(qnorm(qexp(mu, t)), np.ones(100), TestData.EXACT_TOL, "|exp|")
        assert_close(qmul(qexp(mu, s), qexp(mu, t)), qexp(mu, s + t), TestData.ALGEBRA_TOL, "exp sum")

        print("✅ Exponential is unit-norm and additive along a fixed axis")

    def test_exp_pure_value_type(self):
        """Test exp(i π/2) = i and the scalar overload"""
        assert exp_pure(AXIS_I, np.pi / 2).isclose(I)
        assert exp_pure(AXIS_J, np.pi).isclose(-ONE)
        assert np.allclose(exp_pure(np.array([0.0, 0.0, 1.0]), 0.0), [1.0, 0.0, 0.0, 0.0])

        print("✅ exp_pure on value types")

    def test_polar_product_is_pure(self, rng):
        """Test q j conj(q) is pure with modulus |q|²"""
        q = rng.standard_normal((100, 4))
        v = polar_product(q)

        assert np.max(np.abs(v[:, 0])) < 1e-12 * np.max(qnorm(q) ** 2)
        assert_close(qnorm(v), qnorm(q) ** 2, TestData.ALGEBRA_TOL, "|q j conj(q)|")

        print("✅ Polar product is a pure quaternion")


@pytest.mark.unit
class TestAxesAndPairs:
    """PureUnitQuaternion, axis normalization and the complex-pair view"""

    def test_axis_is_normalized(self):
        """Test construction normalizes the axis"""
        mu = PureUnitQuaternion(0.0, 3.0, 4.0)
        assert np.allclose(mu.to_array(), [0.0, 0.6, 0.8])
        assert (-mu).to_array()[1] == pytest.approx(-0.6)

        print("✅ Axis normalized on construction")

    def test_degenerate_axis_rejected(self):
        """Test a zero axis raises"""
        with pytest.raises(InvalidInputError, match="degenerate axis"):
            PureUnitQuaternion(0.0, 0.0, 1e-15)

        print("✅ Degenerate axis rejected")

    def test_normalize_axes_missing_rows(self):
        """Test zero rows become NaN only when missing axes are allowed"""
        vectors = np.array([[2.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

        out = normalize_axes(vectors, allow_missing=True)
        assert np.allclose(out[0], [1.0, 0.0, 0.0])
        assert np.all(np.isnan(out[1]))

        with pytest.raises(InvalidInputError, match="degenerate axis at bin 1"):
            normalize_axes(vectors)

        print("✅ Missing axes handled")

    def test_inner_product_clipped(self):
        """Test inner3 on value types and clipping of rounding overshoot"""
        assert inner3(AXIS_J, AXIS_K) == pytest.approx(0.0)
        assert inner3(AXIS_I, -AXIS_I) == pytest.approx(-1.0)
        assert inner3(np.array([1.0 + 1e-15, 0.0, 0.0]), np.array([1.0, 0.0, 0.0])) <= 1.0

        print("✅ Inner product")

    def test_complex_pair_reconstructs_quaternion(self, rng):
        """Test q = q1 + i q2 with q1, q2 in the j-subfield"""
        q = rng.standard_normal((100, 4))
        q1, q2 = to_complex_pair(q)

        rebuilt = embed_cj(q1) + qmul(UNIT_I, embed_cj(q2))
        assert_close(rebuilt, q, TestData.EXACT_TOL, "q1 + i q2")
        assert_close(from_complex_pair(q1, q2), q, TestData.EXACT_TOL, "pair round trip")

        pair = ComplexPair.from_quaternion(Quaternion(1.0, 2.0, 3.0, 4.0))
        assert pair == ComplexPair(1 + 3j, 2 + 4j)
        assert pair.to_quaternion() == Quaternion(1.0, 2.0, 3.0, 4.0)

        print("✅ Complex-pair representation")

    def test_j_subfield_commutes_with_j(self, rng):
        """Test embedded complex numbers commute with j but not with i"""
        z = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        q = embed_cj(z)
        j = J.to_array()

        assert_close(qmul(q, j), qmul(j, q), TestData.EXACT_TOL, "zj = jz")
        assert not np.allclose(qmul(q, UNIT_I), qmul(UNIT_I, q))

        print("✅ j-subfield commutes with j")
