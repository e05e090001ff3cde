"""Scalar field layer: exact polynomials, closed-form fields, grids."""

from fractions import Fraction

import numpy as np
import pytest

from qma.errors import DimensionError, OracleError
from qma.fields import (
    BlackBox,
    ChainField,
    ClosedForm,
    GridField,
    InvShift,
    LinearSubstitution,
    Polynomial,
    QuadraticForm,
    invshift,
    normsq,
    quadform,
)
from qma.hamilton import QMatrix, Quaternion, QI


def rand_pts(rng, n, count, scale=1.5):
    return scale * rng.standard_normal((count, 4 * n))


# ---------------------------------------------------------------------------
# Polynomial


def test_polynomial_basic_algebra():
    x0 = Polynomial.coordinate(1, 0)
    x1 = Polynomial.coordinate(1, 1)
    p = (x0 + x1) ** 3
    q = x0**3 + 3 * x0**2 * x1 + 3 * x0 * x1**2 + x1**3
    assert p == q
    assert p.degree() == 3
    assert (p - q).is_zero()
    assert (-p) + p == Polynomial(1)


def test_polynomial_constant_and_scalar_equality():
    c = Polynomial.constant(2, Fraction(5, 3))
    assert c == Fraction(5, 3)
    assert c.value([0] * 8) == Fraction(5, 3)
    assert Polynomial(1) == 0
    assert Polynomial.constant(1, 0).is_zero()


def test_polynomial_exact_coefficients():
    # Fraction coefficients survive arithmetic with no float contamination
    x0 = Polynomial.coordinate(1, 0)
    p = Fraction(1, 3) * x0**2 - Fraction(1, 7)
    val = p.value([Fraction(1, 2), 0, 0, 0])
    assert val == Fraction(1, 12) - Fraction(1, 7)
    assert all(isinstance(c, Fraction) for c in p.terms.values())


def test_polynomial_diff_exact():
    x0 = Polynomial.coordinate(1, 0)
    x2 = Polynomial.coordinate(1, 2)
    p = x0**2 * x2 + 4 * x2
    assert p.diff(0) == 2 * x0 * x2
    assert p.diff(2) == x0**2 + Polynomial.constant(1, 4)
    assert p.diff(1).is_zero()
    # mixed partials commute exactly
    assert p.diff(0).diff(2) == p.diff(2).diff(0)


def test_polynomial_guards():
    with pytest.raises(DimensionError):
        Polynomial(1, {(1, 0): 1})
    with pytest.raises(ValueError):
        Polynomial(1, {(-1, 0, 0, 0): 1})
    with pytest.raises(ValueError):
        Polynomial.coordinate(1, 0) ** -2


def test_polynomial_batch_matches_pointwise():
    rng = np.random.default_rng(5)
    x0 = Polynomial.coordinate(2, 0)
    x5 = Polynomial.coordinate(2, 5)
    p = x0**3 - 2 * x0 * x5 + Fraction(1, 2)
    pts = rand_pts(rng, 2, 17)
    np.testing.assert_allclose(p.values(pts), [float(p.value(x)) for x in pts], rtol=1e-13)
    np.testing.assert_allclose(p.gradients(pts), [p.gradient(x) for x in pts], rtol=1e-13)
    np.testing.assert_allclose(p.hessians(pts), [p.hessian(x) for x in pts], rtol=1e-13)


# ---------------------------------------------------------------------------
# normsq / quadform


@pytest.mark.parametrize("n", [1, 2, 3])
def test_normsq_value_gradient_hessian(n):
    rng = np.random.default_rng(n)
    u = normsq(n)
    x = rng.standard_normal(4 * n)
    assert u.value(x) == pytest.approx(np.dot(x, x))
    np.testing.assert_allclose(u.gradient(x), 2 * x, rtol=1e-14)
    np.testing.assert_allclose(u.hessian(x), 2 * np.eye(4 * n), rtol=0, atol=0)


def test_normsq_center():
    c = [1.0, 0.0, -2.0, 0.5]
    u = normsq(1, center=c)
    assert u.value(c) == 0
    assert u.value([2.0, 0.0, -2.0, 0.5]) == pytest.approx(1.0)
    np.testing.assert_allclose(u.hessian(np.zeros(4)), 2 * np.eye(4))


def test_normsq_is_exact_polynomial():
    u = normsq(1)
    assert isinstance(u, QuadraticForm)
    assert u.terms == {
        (2, 0, 0, 0): Fraction(1),
        (0, 2, 0, 0): Fraction(1),
        (0, 0, 2, 0): Fraction(1),
        (0, 0, 0, 2): Fraction(1),
    }
    assert u.matrix == QMatrix.identity(1)


def test_quadform_matches_quaternion_arithmetic_exactly():
    q = Quaternion(Fraction(1, 2), Fraction(-1, 3), Fraction(1, 5), Fraction(2))
    a = QMatrix([[Quaternion(2), q], [q.conjugate(), Quaternion(3)]])
    u = quadform(a)
    x = [Fraction(1, 3), Fraction(-2, 7), Fraction(1), Fraction(0),
         Fraction(3, 4), Fraction(1, 9), Fraction(-1, 2), Fraction(5)]
    y = [Quaternion(*x[0:4]), Quaternion(*x[4:8])]
    acc = Quaternion(0)
    for j in range(2):
        for k in range(2):
            acc = acc + y[j].conjugate() * a[j, k] * y[k]
    assert acc.components[1:] == (0, 0, 0)
    assert u.value(x) == acc.components[0]


def test_quadform_rejects_non_hyperhermitian():
    with pytest.raises(ValueError):
        quadform([[Quaternion(2), QI], [QI, Quaternion(3)]])
    with pytest.raises(ValueError):
        quadform([[QI]])


def test_quadform_center_and_real_matrix():
    a = QMatrix([[Quaternion(Fraction(3))]])
    c = np.array([0.5, -1.0, 0.0, 2.0])
    u = quadform(a, center=c)
    assert u.value(c) == 0
    np.testing.assert_allclose(u.m_real, 3 * np.eye(4), atol=1e-12)
    np.testing.assert_allclose(u.gradient(c + [1, 0, 0, 0]), [6, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(u.hessian(np.zeros(4)), 6 * np.eye(4), atol=1e-12)


def test_quadraticform_batch_matches_polynomial():
    rng = np.random.default_rng(11)
    q = Quaternion(0, Fraction(1, 2), 0, Fraction(-1, 4))
    a = QMatrix([[Quaternion(1), q], [q.conjugate(), Quaternion(2)]])
    u = quadform(a, center=rng.standard_normal(8))
    pts = rand_pts(rng, 2, 23)
    slow = [float(Polynomial.value(u, x)) for x in pts]
    np.testing.assert_allclose(u.values(pts), slow, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(u.gradients(pts), [u.gradient(x) for x in pts], rtol=1e-12)
    np.testing.assert_allclose(u.hessians(pts), [u.hessian(x) for x in pts], rtol=1e-12)


# ---------------------------------------------------------------------------
# InvShift


def test_invshift_against_finite_differences():
    rng = np.random.default_rng(3)
    u = InvShift(1, eps=0.75, center=[0.2, 0.0, -0.3, 0.1])
    bb = BlackBox(1, u.value)
    for _ in range(5):
        x = rng.standard_normal(4)
        np.testing.assert_allclose(u.gradient(x), bb.gradient(x), rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(u.hessian(x), bb.hessian(x), rtol=1e-5, atol=1e-6)


def test_invshift_batch_matches_pointwise():
    rng = np.random.default_rng(4)
    u = invshift(2, eps=0.01)
    pts = rand_pts(rng, 2, 19)
    np.testing.assert_allclose(u.values(pts), [u.value(x) for x in pts], rtol=1e-14)
    np.testing.assert_allclose(u.gradients(pts), [u.gradient(x) for x in pts], rtol=1e-14)
    np.testing.assert_allclose(u.hessians(pts), [u.hessian(x) for x in pts], rtol=1e-14)


def test_invshift_eps_zero_singular_family():
    u = invshift(1, eps=0.0)
    assert u.value([1.0, 0, 0, 0]) == -1.0
    assert u.value([2.0, 0, 0, 0]) == -0.25
    with pytest.raises(ValueError):
        invshift(1, eps=-1e-6)


# ---------------------------------------------------------------------------
# ClosedForm / BlackBox / DerivedField


def test_closed_form_requires_oracles():
    f = ClosedForm(1, lambda x: float(np.sum(x**2)), name="plain")
    assert f.value([1, 1, 0, 0]) == 2.0
    with pytest.raises(OracleError):
        f.gradient(np.zeros(4))
    with pytest.raises(OracleError):
        f.hessian(np.zeros(4))
    pts = np.array([[1.0, 0, 0, 0], [0, 2.0, 0, 0]])
    np.testing.assert_allclose(f.values(pts), [1.0, 4.0])


def test_blackbox_derivatives_on_quartic():
    u = BlackBox(1, lambda x: float(np.sum(x**2)) ** 2)
    x = np.array([0.5, -1.0, 0.25, 2.0])
    s = float(np.dot(x, x))
    np.testing.assert_allclose(u.gradient(x), 4 * s * x, rtol=1e-6)
    np.testing.assert_allclose(
        u.hessian(x), 4 * s * np.eye(4) + 8 * np.outer(x, x), rtol=1e-5, atol=1e-5
    )


def test_derived_field_reads_parent_oracles():
    u = InvShift(1, eps=1.0)
    d0 = u.diff(0)
    rng = np.random.default_rng(9)
    x = rng.standard_normal(4)
    assert d0.value(x) == u.gradient(x)[0]
    np.testing.assert_allclose(d0.gradient(x), u.hessian(x)[0], rtol=1e-14)
    pts = rand_pts(rng, 1, 7)
    np.testing.assert_allclose(d0.values(pts), u.gradients(pts)[:, 0], rtol=1e-14)
    np.testing.assert_allclose(d0.gradients(pts), u.hessians(pts)[:, 0, :], rtol=1e-14)


def test_derived_field_hessian_third_derivative():
    # parent |x|^4 has Hessian 4s*I + 8xx^T, so d(parent)/dx_a has Hessian
    # 8(x_m d_la + x_l d_ma + x_a d_ml); the parent Hessian is quadratic, so
    # the internal central difference is exact up to roundoff
    def hess(x):
        s = float(np.dot(x, x))
        return 4 * s * np.eye(4) + 8 * np.outer(x, x)

    u = ClosedForm(
        1,
        lambda x: float(np.dot(x, x)) ** 2,
        lambda x: 4 * float(np.dot(x, x)) * x,
        hess,
    )
    x = np.array([0.3, -0.7, 1.1, 0.4])
    a = 2
    expected = np.zeros((4, 4))
    for m in range(4):
        for l in range(4):
            expected[m, l] = 8 * (
                x[m] * (l == a) + x[l] * (m == a) + x[a] * (m == l)
            )
    np.testing.assert_allclose(u.diff(a).hessian(x), expected, atol=1e-7)


# ---------------------------------------------------------------------------
# composition


def test_chain_field_matches_exact_square():
    phi = normsq(1)
    chain = ChainField(
        phi,
        lambda t: t**2,
        lambda t: 2.0 * t,
        lambda t: 2.0 * np.ones_like(np.asarray(t, dtype=float)),
        name="square",
    )
    exact = Polynomial.__mul__(phi, phi)
    rng = np.random.default_rng(21)
    pts = rand_pts(rng, 1, 11)
    np.testing.assert_allclose(chain.values(pts), exact.values(pts), rtol=1e-12)
    np.testing.assert_allclose(chain.gradients(pts), exact.gradients(pts), rtol=1e-12)
    np.testing.assert_allclose(chain.hessians(pts), exact.hessians(pts), rtol=1e-12)
    x = pts[0]
    np.testing.assert_allclose(chain.hessian(x), exact.hessian(x), rtol=1e-12)


def test_linear_substitution_chain_rule():
    rng = np.random.default_rng(31)
    base = quadform(QMatrix([[Quaternion(3)]]))
    rmat = rng.standard_normal((4, 4))
    shift = rng.standard_normal(4)
    u = LinearSubstitution(base, rmat, shift)
    bb = BlackBox(1, u.value)
    x = rng.standard_normal(4)
    assert u.value(x) == pytest.approx(base.value(rmat @ x + shift))
    np.testing.assert_allclose(u.gradient(x), bb.gradient(x), rtol=1e-6, atol=1e-7)
    np.testing.assert_allclose(u.hessian(x), bb.hessian(x), rtol=1e-4, atol=1e-4)
    pts = rand_pts(rng, 1, 9)
    np.testing.assert_allclose(u.values(pts), [u.value(p) for p in pts], rtol=1e-13)
    np.testing.assert_allclose(u.gradients(pts), [u.gradient(p) for p in pts], rtol=1e-13)
    np.testing.assert_allclose(u.hessians(pts), [u.hessian(p) for p in pts], rtol=1e-13)


def test_linear_substitution_shape_guard():
    with pytest.raises(DimensionError):
        LinearSubstitution(normsq(1), np.eye(3))


# ---------------------------------------------------------------------------
# field algebra


def test_field_sum_and_scale_mixed_types():
    rng = np.random.default_rng(41)
    p = normsq(1)
    u = invshift(1, eps=0.5)
    s = p + u
    x = rng.standard_normal(4)
    assert s.value(x) == pytest.approx(p.value(x) + u.value(x))
    np.testing.assert_allclose(s.hessian(x), p.hessian(x) + u.hessian(x), rtol=1e-14)
    half = 0.5 * u
    assert half.value(x) == pytest.approx(0.5 * u.value(x))
    diff = u - u
    assert diff.value(x) == 0.0
    np.testing.assert_allclose(diff.gradient(x), np.zeros(4), atol=0)
    neg = -u
    assert neg.value(x) == -u.value(x)
    shifted = 1 - u
    assert shifted.value(x) == pytest.approx(1 - u.value(x))


def test_field_product_rule():
    rng = np.random.default_rng(43)
    p = normsq(1)
    u = invshift(1, eps=0.25)
    prod = p * u
    bb = BlackBox(1, lambda x: p.value(x) * u.value(x))
    x = 0.5 * rng.standard_normal(4)
    assert prod.value(x) == pytest.approx(p.value(x) * u.value(x))
    np.testing.assert_allclose(prod.gradient(x), bb.gradient(x), rtol=1e-6, atol=1e-7)
    np.testing.assert_allclose(prod.hessian(x), bb.hessian(x), rtol=1e-4, atol=1e-4)
    pts = rand_pts(rng, 1, 8, scale=0.5)
    np.testing.assert_allclose(prod.values(pts), [prod.value(q) for q in pts], rtol=1e-13)
    np.testing.assert_allclose(
        prod.hessians(pts), [prod.hessian(q) for q in pts], rtol=1e-13
    )


def test_field_algebra_guards():
    with pytest.raises(DimensionError):
        invshift(1) + invshift(2)
    with pytest.raises(TypeError):
        normsq(1) + "x"


# ---------------------------------------------------------------------------
# GridField


def test_grid_field_requires_4d():
    with pytest.raises(DimensionError):
        GridField(np.zeros(4), 0.1, np.zeros((3, 3, 3)))


def test_grid_field_linear_interpolation_exact():
    lin = Polynomial.coordinate(1, 0) + 2 * Polynomial.coordinate(1, 1) - Polynomial.coordinate(1, 3)
    g = GridField.sample(lin, origin=[-1.0] * 4, spacing=0.25, shape=(9, 9, 9, 9))
    rng = np.random.default_rng(55)
    for _ in range(10):
        x = rng.uniform(-0.9, 0.9, size=4)
        assert g.value(x) == pytest.approx(float(lin.value(x)), abs=1e-12)


def test_grid_field_derivatives_at_nodes():
    u = normsq(1)
    g = GridField.sample(u, origin=[-1.0] * 4, spacing=0.25, shape=(9, 9, 9, 9))
    x = np.array([-0.25, 0.5, 0.0, 0.25])
    assert g.value(x) == pytest.approx(u.value(x), abs=1e-12)
    np.testing.assert_allclose(g.gradient(x), 2 * x, atol=1e-10)
    np.testing.assert_allclose(g.hessian(x), 2 * np.eye(4), atol=1e-9)


def test_grid_field_boundary_guard():
    g = GridField.sample(normsq(1), origin=[-1.0] * 4, spacing=0.25, shape=(9, 9, 9, 9))
    with pytest.raises(ValueError):
        g.gradient([-1.0, 0.0, 0.0, 0.0])


def test_grid_field_interior_nodes():
    g = GridField(np.full(4, -1.0), 0.25, np.zeros((9, 9, 9, 9)))
    inner = g.interior_nodes(1)
    assert inner.shape == (7**4, 4)
    assert np.abs(inner).max() <= 0.75 + 1e-12
    only_center = g.interior_nodes(4)
    np.testing.assert_allclose(only_center, [[0.0, 0.0, 0.0, 0.0]], atol=1e-12)
