from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdstc.cda import AlgebraSpec, certify_division, lam, lam_tilde
from fdstc.errors import GammaNotNegative, TestInconclusive
from fdstc.numfield import RATIONALS, cyclotomic_real, quadratic

K7 = cyclotomic_real(7)
ALG = AlgebraSpec(K7, -1, K7(-11), label="cubic base")

small = st.fractions(min_value=-5, max_value=5, max_denominator=3)
coeffs = st.lists(small, min_size=3, max_size=3).map(K7)
elements = st.tuples(coeffs, coeffs, coeffs, coeffs).map(
    lambda t: ALG.element((t[0], t[1]), (t[2], t[3])))


@given(elements, elements, elements)
def test_multiplication_is_associative(x, y, z):
    lhs, rhs = (x * y) * z, x * (y * z)
    assert lhs.c == rhs.c and lhs.d == rhs.d


@given(elements, elements)
def test_reduced_norm_is_multiplicative(x, y):
    assert (x * y).reduced_norm() == x.reduced_norm() * y.reduced_norm()


@given(elements, elements)
def test_left_regular_map_is_a_homomorphism(x, y):
    assert lam(x * y) == lam(x) @ lam(y)


@given(elements)
def test_determinant_equals_reduced_norm(x):
    d = lam(x).det()
    assert d.d.is_zero() and d.c == x.reduced_norm()


@given(elements)
def test_balanced_map_keeps_the_determinant(x):
    num = np.linalg.det(lam_tilde(x).numeric(0))
    assert abs(num - x.reduced_norm().embed(0)) < 1e-7 * (1 + abs(num))


@given(elements)
def test_inverse(x):
    if x.reduced_norm().is_zero():
        return
    e = x * x.inverse()
    assert e.c == ALG.element(1, 0).c and e.d.is_zero()


def test_balanced_map_needs_negative_gamma():
    alg = AlgebraSpec(K7, -1, K7(3))
    with pytest.raises(GammaNotNegative):
        lam_tilde(alg.element(1, 1))


def test_hamilton_quaternions_certified_by_norm_form():
    cert = certify_division(AlgebraSpec(RATIONALS, -1, RATIONALS(-1)), "norm-form")
    assert cert.strategy == "norm-form"


def test_norm_form_inconclusive_for_positive_gamma():
    with pytest.raises(TestInconclusive):
        certify_division(AlgebraSpec(RATIONALS, -1, RATIONALS(3)), "norm-form")


def test_residue_certificate_for_cubic_base():
    cert = certify_division(ALG, "residue-nonsquare", 11)
    assert (cert.q, cert.uniformizer, cert.nonsquare) == (11, "gamma", "a")
    assert cert.residue_degree == 3 and cert.witness_order == 2 and cert.group_order == 1330


def test_residue_test_inconclusive_when_gamma_is_a_residue_square():
    K = quadratic(5)
    alg = AlgebraSpec(K, -3, K([0, Fraction(-2, 5)]), center_radicand=-1)
    with pytest.raises(TestInconclusive):
        certify_division(alg, "residue-nonsquare", 3)


def test_split_algebra_is_never_certified():
    # (-1, 2) over Q is split: 1^2 + 1^2 = 2
    alg = AlgebraSpec(RATIONALS, -1, RATIONALS(2))
    for q in (3, 5, 7, 11, 13):
        with pytest.raises(TestInconclusive):
            certify_division(alg, "residue-nonsquare", q)
