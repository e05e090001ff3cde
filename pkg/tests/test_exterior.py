"""Exterior algebra over C^(2n): wedge, reality, positivity, pullbacks."""

import math
from fractions import Fraction

import numpy as np
import pytest

from qma.exterior import (ExtElement, HLinearMap, RationalComplex, beta,
                          elementary_sp, indices_to_mask, is_real,
                          mask_to_indices, omega_top, perm_sign, positivity_test,
                          pullback, random_elementary_sp, random_strongly_positive,
                          rho_j, top_coefficient, wedge_sign)
from qma.hamilton import QI, QMatrix, Quaternion
from qma.errors import DimensionError


def test_rational_complex_arithmetic():
    a = RationalComplex(Fraction(1, 2), Fraction(-1, 3))
    b = RationalComplex(2, 1)
    s = a + b
    assert (s.re, s.im) == (Fraction(5, 2), Fraction(2, 3))
    p = a * b
    # (1/2 - i/3)(2 + i) = (1 + 1/3) + i(1/2 - 2/3)
    assert (p.re, p.im) == (Fraction(4, 3), Fraction(-1, 6))
    m = -a
    assert (m.re, m.im) == (Fraction(-1, 2), Fraction(1, 3))


def test_mask_index_round_trip():
    for indices in [(0,), (1, 3), (0, 2, 5)]:
        mask = indices_to_mask(indices)
        assert tuple(mask_to_indices(mask)) == indices


def test_wedge_sign_and_perm_sign():
    assert perm_sign([0, 1, 2]) == 1
    assert perm_sign([1, 0, 2]) == -1
    assert perm_sign([2, 0, 1]) == 1
    # wedge_sign counts the crossings between two disjoint masks
    m01 = indices_to_mask((0, 1))
    m23 = indices_to_mask((2, 3))
    assert wedge_sign(m01, m23) == 1
    assert wedge_sign(indices_to_mask((1,)), indices_to_mask((0,))) == -1


def test_basic_wedge_algebra():
    n = 2
    w = [ExtElement.from_indices(n, (i,)) for i in range(2 * n)]
    assert (w[0] ^ w[0]).is_zero()
    ab = w[0] ^ w[1]
    ba = w[1] ^ w[0]
    assert ab == -ba
    # associativity on a random exact combination
    x = w[0] + w[2].scale(Fraction(2, 3))
    y = w[1] - w[3]
    z = w[2] + w[3]
    assert ((x ^ y) ^ z) == (x ^ (y ^ z))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_beta_power_normalization(n):
    c = top_coefficient(beta(n).wedge_power(n))
    assert complex(c) == complex(math.factorial(n))
    # and the wedge with one more beta vanishes above top degree
    assert beta(n).wedge_power(n).wedge(beta(n)).is_zero()


def test_omega_top_is_unit_top_form():
    t = omega_top(2)
    assert t.degree == 4
    assert complex(top_coefficient(t)) == 1


@pytest.mark.parametrize("n", [1, 2])
def test_rho_j_properties(n):
    # beta is rho(j)-real, and rho(j) is an involution on even degrees
    b = beta(n)
    assert rho_j(b) == b
    assert is_real(b)
    assert not is_real(b.scale(1j))
    w0 = ExtElement.from_indices(n, (0,))
    assert rho_j(rho_j(w0)) == -w0


def test_pullback_is_algebra_homomorphism():
    rng = np.random.default_rng(3)
    n, k = 2, 2
    g = HLinearMap.random(rng, n, k)
    a = random_strongly_positive(rng, n, 1)
    b = random_strongly_positive(rng, n, 1)
    lhs = pullback(a.wedge(b), g.tau)
    rhs = pullback(a, g.tau).wedge(pullback(b, g.tau))
    diff = lhs - rhs
    assert diff.norm_inf() <= 1e-10


def test_pullback_by_identity():
    n = 2
    ident = HLinearMap(QMatrix.identity(n))
    b = beta(n)
    assert ident.pullback(b) == b


def test_elementary_sp_repeated_factor_vanishes():
    # eta1 = eta2 makes xi ^ xi with a rank-2 image: exactly zero
    rng = np.random.default_rng(11)
    eta = HLinearMap.random(rng, 1, 2)
    elem = elementary_sp([eta, eta])
    assert elem.is_zero(tol=1e-12)


def test_elementary_sp_unit_map_is_coordinate_plane():
    # eta = projection to the first quaternion coordinate: the element is
    # omega^0 ^ omega^1 exactly
    eta = QMatrix([[1, 0]])
    elem = elementary_sp([eta])
    expect = ExtElement.from_indices(2, (0, 1))
    assert elem == expect


def test_positivity_on_constructed_sp():
    rng = np.random.default_rng(7)
    for k in (1, 2):
        for _ in range(5):
            elem = random_strongly_positive(rng, 2, k)
            res = positivity_test(elem, samples=128, seed=13)
            assert res, f"false negative on a strongly positive element: {res}"
            assert res.min_kappa >= -1e-9


def test_positivity_rejects_negative_multiple():
    rng = np.random.default_rng(7)
    elem = random_elementary_sp(rng, 2, 1).scale(-1)
    res = positivity_test(elem, samples=128, seed=0)
    assert not res
    assert res.witness is not None


def test_positivity_rejects_non_real():
    elem = ExtElement.from_indices(2, (0, 1), coeff=1j)
    res = positivity_test(elem, samples=16, seed=0)
    assert not res


def test_beta_is_strongly_positive_combination():
    # beta_n equals the sum of the coordinate elementary elements
    n = 2
    parts = []
    for l in range(n):
        row = [[1 if c == l else 0 for c in range(n)]]
        parts.append(elementary_sp([QMatrix(row)]))
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    assert total == beta(n)


def test_wedge_dimension_guards():
    with pytest.raises(DimensionError):
        ExtElement(1, 3)
    with pytest.raises(DimensionError):
        beta(1).wedge(beta(2))
