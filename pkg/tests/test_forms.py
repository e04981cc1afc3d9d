import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermitia.corpus import kodaira_surface, su2_su2
from hermitia.forms import (InvariantForm, ce_differential, contract, lefschetz, multi_indices, power,
                            wedge)
from hermitia.lie_algebra import abelian

from helpers import corpus_structures

e = InvariantForm.basis


def random_form(rng, dim, k, complex_=False):
    c = rng.normal(size=comb(dim, k))
    if complex_:
        c = c + 1j * rng.normal(size=c.size)
    return InvariantForm(dim, k, c)


def test_multi_indices_are_lexicographic():
    assert multi_indices(4, 2) == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def test_wedge_basics():
    assert wedge(e(4, 1), e(4, 2)).allclose(e(4, 1, 2))
    assert wedge(e(4, 2), e(4, 1)).allclose(-e(4, 1, 2))
    top = e(4, 1, 2, 3, 4)
    assert wedge(top, e(4, 1)).coeffs.size == 0
    with pytest.raises(ValueError):
        wedge(e(4, 1), e(6, 1))


def test_real_promotes_to_complex():
    z = wedge(e(4, 1), 1j * e(4, 2))
    assert z.is_complex and z[(1, 2)] == 1j


@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(1, 3))
def test_graded_commutativity(seed, k, l):
    rng = np.random.default_rng(seed)
    a, b = random_form(rng, 6, k), random_form(rng, 6, l)
    assert wedge(a, b).allclose((-1) ** (k * l) * wedge(b, a), atol=1e-10)


@given(st.integers(0, 2**31))
def test_odd_form_squares_to_zero(seed):
    a = random_form(np.random.default_rng(seed), 6, 3)
    assert wedge(a, a).max_abs() < 1e-10


def test_ce_differential_su2():
    d = ce_differential(su2_su2(), e(6, 1))
    assert d.allclose(-2 * e(6, 2, 3))


def test_abelian_d_vanishes():
    sc = abelian(4)
    rng = np.random.default_rng(0)
    for k in range(5):
        assert ce_differential(sc, random_form(rng, 4, k)).max_abs() == 0.0


def test_d_on_one_forms_is_minus_bracket():
    sc = su2_su2()
    rng = np.random.default_rng(1)
    a = random_form(rng, 6, 1)
    x, y = rng.normal(size=(2, 6))
    assert ce_differential(sc, a)(x, y) == pytest.approx(-a(sc.bracket(x, y)))


def test_d_squared_vanishes_on_corpus():
    rng = np.random.default_rng(2)
    for name, H in corpus_structures():
        for k in range(H.dim - 1):
            a = random_form(rng, H.dim, k, complex_=True)
            assert ce_differential(H.sc, ce_differential(H.sc, a)).max_abs() < 1e-10, (name, k)


@given(st.integers(0, 2**31), st.integers(0, 3), st.integers(0, 3))
def test_leibniz(seed, k, l):
    rng = np.random.default_rng(seed)
    sc = su2_su2()
    a, b = random_form(rng, 6, k), random_form(rng, 6, l)
    lhs = ce_differential(sc, wedge(a, b))
    rhs = wedge(ce_differential(sc, a), b) + (-1) ** k * wedge(a, ce_differential(sc, b))
    assert lhs.allclose(rhs, atol=1e-9)


def test_contract_examples():
    assert contract(e(4, 1, 2), np.eye(4)[0]).allclose(e(4, 2))
    assert contract(e(4, 1, 2), np.eye(4)[1]).allclose(-e(4, 1))
    with pytest.raises(ValueError):
        contract(InvariantForm(4, 0, np.ones(1)), np.eye(4)[0])


def test_contract_omega_matches_entrywise():
    for name, H in corpus_structures():
        x = np.arange(1.0, H.dim + 1)
        lhs = contract(H.omega, x)
        for j in range(H.dim):
            y = np.eye(H.dim)[j]
            assert lhs(y) == pytest.approx(H.omega(x, y)), name
            assert lhs(y) == pytest.approx(x @ H.g @ H.J @ y), name


@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(0, 3))
def test_contraction_is_antiderivation(seed, k, l):
    rng = np.random.default_rng(seed)
    a, b = random_form(rng, 6, k), random_form(rng, 6, l)
    x = rng.normal(size=6)
    lhs = contract(wedge(a, b), x)
    rhs = wedge(contract(a, x), b)
    if l:
        rhs = rhs + (-1) ** k * wedge(a, contract(b, x))
    assert lhs.allclose(rhs, atol=1e-9)


def test_lefschetz():
    H = kodaira_surface()
    a = e(4, 1, 3)
    assert lefschetz(H.omega, a, 0).allclose(a)
    assert lefschetz(H.omega, e(4, 1, 2, 3, 4)).coeffs.size == 0
    theta = H.lee_form().theta
    assert lefschetz(H.omega, H.d(theta), H.n - 1).max_abs() < 1e-12


def test_lee_relation_on_kodaira():
    H = kodaira_surface()
    theta = H.lee_form().theta
    wn1 = power(H.omega, H.n - 1)
    assert wedge(theta, wn1).allclose(H.d(wn1))


@given(st.integers(0, 2**31), st.integers(0, 4))
def test_json_round_trip(seed, k):
    a = random_form(np.random.default_rng(seed), 4, k, complex_=True)
    back = InvariantForm.from_json(json.loads(json.dumps(a.to_json())))
    np.testing.assert_array_equal(back.coeffs, a.coeffs)


def test_json_layout():
    obj = (2 * e(4, 1, 3)).to_json()
    assert obj["degree"] == 2 and obj["coeffs"] == {"1,3": [2.0, 0.0]}
