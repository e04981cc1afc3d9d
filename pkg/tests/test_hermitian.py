from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermitia import almost_abelian as aa
from hermitia.connections import bismut, torsion_3form
from hermitia.corpus import (calabi_eckmann_su2su2, coframe_components, flat_torus, kodaira_surface,
                             nilpotent_8d, standard_coframe)
from hermitia.forms import InvariantForm, power, wedge
from hermitia.hermitian import HermitianStructure, StructureError, metric_from_omega
from hermitia.lie_algebra import abelian

from helpers import corpus_structures, random_compatible_metric


def test_omega_convention_entrywise():
    for name, H in corpus_structures():
        E = np.eye(H.dim)
        for i in range(H.dim):
            for j in range(H.dim):
                assert H.omega(E[i], E[j]) == pytest.approx(H.g[i] @ H.J[:, j]), name
        np.testing.assert_allclose(metric_from_omega(H.J, H.omega), H.g, atol=1e-12)


def test_rejects_invalid_structures():
    sc = abelian(4)
    with pytest.raises(StructureError):
        HermitianStructure(sc, np.eye(4))
    J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)
    with pytest.raises(StructureError):
        HermitianStructure(sc, J, np.diag([1.0, 2.0, 1.0, 1.0]))


def test_nijenhuis_examples():
    assert calabi_eckmann_su2su2(0).nijenhuis_residual() == 0.0
    rng = np.random.default_rng(0)
    J0 = flat_torus(2).J
    for _ in range(5):
        M = rng.normal(size=(4, 4))
        J = M @ J0 @ np.linalg.inv(M)
        H = HermitianStructure(abelian(4), J, random_compatible_metric(rng, J))
        assert H.nijenhuis_residual() < 1e-10
    # shear in the J1-line span(e2, e3) does not commute with J1: N(e4, e2) = -A e3 - J A e2 != 0
    spec = aa.AlmostAbelianSpec(0.0, np.zeros(2), np.array([[1.0, 0.0], [0.0, 0.0]]))
    H = HermitianStructure(aa.structure_constants(spec), aa.complex_structure(spec))
    assert H.nijenhuis_residual() == pytest.approx(1.0)
    assert not H.is_integrable()[0]
    with pytest.raises(StructureError):
        aa.build(spec)


def test_omega_is_type_11():
    for name, H in corpus_structures():
        assert H.bidegree_project(H.omega, 1, 1).allclose(H.omega), name


def test_theta_splits_into_eta_and_conjugate():
    H = kodaira_surface()
    lee = H.lee_form()
    assert (lee.eta + lee.eta.conj()).allclose(lee.theta)
    assert H.bidegree_project(lee.eta, 1, 0).allclose(lee.eta)


@given(st.integers(0, 2**31), st.integers(0, 6))
def test_bidegree_resolution_of_identity(seed, k):
    H = calabi_eckmann_su2su2(0.3 + 0.1j)
    rng = np.random.default_rng(seed)
    a = InvariantForm(6, k, rng.normal(size=comb(6, k)) + 1j * rng.normal(size=comb(6, k)))
    total = sum(H.bidegree_parts(a).values(), InvariantForm.zero(6, k, True))
    assert total.allclose(a, atol=1e-10)
    with pytest.raises(ValueError):
        H.bidegree_project(a, -1, k + 1)


def test_nilpotent_del_omega():
    # with omega = sum phi^j ^ conj(phi^j): del omega = -l1 phi^{13 1b} + i a phi^{23 2b} - l2 phi^{24 2b}
    for l1, l2, a in [(1, 1, 0), (2, 3, 1)]:
        H = nilpotent_8d(l1, l2, a)
        Phi = standard_coframe(4)
        phis = [InvariantForm.one_form(r) for r in Phi]
        w = phis[0] ^ phis[0].conj()
        for p in phis[1:]:
            w = w + (p ^ p.conj())
        got = coframe_components(H.del_(w), Phi)
        expected = {"131b": -l1, "242b": -l2}
        if a:
            expected["232b"] = 1j * a
        assert set(got) == set(expected)
        for key, val in expected.items():
            assert got[key] == pytest.approx(val)


def test_del_delbar_vanish_on_abelian():
    H = flat_torus(2)
    a = InvariantForm(4, 2, np.arange(6.0) + 0j)
    assert H.del_(a).max_abs() == 0 and H.delbar(a).max_abs() == 0


@given(st.integers(0, 2**31), st.integers(0, 4))
def test_del_delbar_algebra(seed, k):
    rng = np.random.default_rng(seed)
    H = calabi_eckmann_su2su2(0.5)
    a = InvariantForm(6, k, rng.normal(size=comb(6, k)) + 1j * rng.normal(size=comb(6, k)))
    assert H.del_(H.del_(a)).max_abs() < 1e-9
    assert H.delbar(H.delbar(a)).max_abs() < 1e-9
    assert (H.del_(H.delbar(a)) + H.delbar(H.del_(a))).max_abs() < 1e-9
    for (p, q), part in H.bidegree_parts(a).items():
        assert H.d(part).allclose(H.del_(part) + H.delbar(part), atol=1e-9), (p, q)


def test_dc_matches_trilinear_evaluation():
    for name, H in corpus_structures():
        assert H.dc(H.omega).allclose(-H.eval_J(H.d(H.omega)), atol=1e-12), name


def test_dc_examples():
    assert flat_torus(2).dc(flat_torus(2).omega).max_abs() == 0
    H = kodaira_surface()
    TB = torsion_3form(H, bismut(H))
    assert H.dc(H.omega).allclose(TB)
    assert (TB + H.hodge_star(H.lee_form().theta)).max_abs() < 1e-12
    CE = calabi_eckmann_su2su2(0)
    assert CE.form_norm(CE.d(CE.dc(CE.omega))) < 1e-12


def test_hodge_star():
    for name, H in corpus_structures():
        one = InvariantForm(H.dim, 0, np.ones(1))
        assert H.hodge_star(one).allclose(power(H.omega, H.n) / factorial(H.n), atol=1e-12), name


@given(st.integers(0, 2**31), st.integers(0, 4))
def test_hodge_star_squared(seed, k):
    rng = np.random.default_rng(seed)
    H = kodaira_surface().with_metric(random_compatible_metric(rng, kodaira_surface().J))
    a = InvariantForm(4, k, rng.normal(size=comb(4, k)))
    assert H.hodge_star(H.hodge_star(a)).allclose((-1) ** (k * (4 - k)) * a, atol=1e-9)


def test_lee_form_examples():
    assert flat_torus(2).lee_form().theta.max_abs() == 0
    H = kodaira_surface()
    lee = H.lee_form()
    assert lee.residual < 1e-12
    assert H.d(lee.theta).max_abs() < 1e-12
    assert lee.norm2 == pytest.approx(1.0)
    for l1, l2, a in [(1, 1, 0), (2, 3, 1)]:
        eta = coframe_components(nilpotent_8d(l1, l2, a).lee_form().eta, standard_coframe(4))
        assert set(eta) == {"3", "4"}
        assert eta["3"] == pytest.approx(l1 - 1j * a) and eta["4"] == pytest.approx(l2)


def test_lee_residual_on_corpus():
    for name, H in corpus_structures():
        if H.n >= 2:
            assert H.lee_form().residual < 1e-12, name


def test_norms():
    H = flat_torus(2)
    assert H.form_norm(InvariantForm.basis(4, 1)) == 1.0
    K = kodaira_surface()
    assert K.form_norm(K.d(K.omega)) ** 2 == pytest.approx(K.lee_form().norm2)
    rng = np.random.default_rng(5)
    for name, H in corpus_structures():
        G = H.with_metric(random_compatible_metric(rng, H.J, H.g))
        assert G.form_norm(G.omega) ** 2 == pytest.approx(G.n), name


def test_gauduchon_form_equals_skt_form_on_surfaces():
    H = kodaira_surface()
    assert power(H.omega, H.n - 1).allclose(H.omega)
