import numpy as np
import pytest

from hermitia import almost_abelian as aa
from hermitia.connections import (Kind, bismut, chern, curvature, levi_civita, nabla_form, nabla_tensor,
                                  ricci_form, ricci_identity_residual, riemannian_scalar, torsion_3form,
                                  torsion_tensor)
from hermitia.corpus import calabi_eckmann_su2su2, flat_torus, hopf_surface, kodaira_surface
from hermitia.classifiers import cyclic_sum
from hermitia.forms import InvariantForm
from hermitia.hermitian import HermitianStructure, StructureError

from helpers import corpus_structures, random_compatible_metric, random_integrable_structures


def metric_defect(H, C):
    # g(nabla_i e_j, e_k) + g(e_j, nabla_i e_k)
    low = np.einsum("ijm,mk->ijk", C.gamma, H.g)
    return np.abs(low + low.transpose(0, 2, 1)).max()


def j_defect(H, C):
    # (nabla_i J) e_j = nabla_i (J e_j) - J nabla_i e_j
    G = C.gamma
    nabla_J = np.einsum("iak,aj->ijk", G, H.J) - np.einsum("km,ijm->ijk", H.J, G)
    return np.abs(nabla_J).max()


def test_levi_civita_examples():
    assert not levi_civita(flat_torus(2)).gamma.any()
    H = calabi_eckmann_su2su2(0)
    np.testing.assert_allclose(levi_civita(H).gamma, 0.5 * H.sc.c, atol=1e-14)
    K = kodaira_surface()
    assert np.abs(nabla_form(K, levi_civita(K), K.lee_form().theta)).max() < 1e-14


def test_bismut_almost_abelian_components():
    rng = np.random.default_rng(0)
    for _ in range(20):
        spec = aa.random_spec(rng, 3, skew=True)
        H = aa.build(spec)
        G = bismut(H).gamma
        last = H.dim - 1
        np.testing.assert_allclose(G[0, 0], spec.a * np.eye(H.dim)[last], atol=1e-12)
        for q in range(len(spec.v)):
            expected = np.zeros(H.dim)
            expected[0] = -spec.v[q]
            np.testing.assert_allclose(G[q + 1, last], expected, atol=1e-12)


def test_bismut_rejects_non_integrable():
    spec = aa.AlmostAbelianSpec(0.0, np.zeros(2), np.array([[1.0, 0.0], [0.0, 0.0]]))
    H = HermitianStructure(aa.structure_constants(spec), aa.complex_structure(spec))
    with pytest.raises(StructureError):
        bismut(H)
    with pytest.raises(StructureError):
        chern(H)


def test_connections_coincide_when_kahler():
    spec = aa.AlmostAbelianSpec(1.3, np.zeros(4), aa.random_spec(np.random.default_rng(1), 3).A)
    H = aa.build(spec)
    assert H.form_norm(H.d(H.omega)) < 1e-12
    lc = levi_civita(H).gamma
    assert np.abs(lc).max() > 0.1
    np.testing.assert_allclose(bismut(H).gamma, lc, atol=1e-12)
    np.testing.assert_allclose(chern(H).gamma, lc, atol=1e-12)
    assert not bismut(flat_torus(2)).gamma.any()


def test_hermitian_and_torsion_gates():
    rng = np.random.default_rng(2)
    structures = [H for _, H in corpus_structures()] + random_integrable_structures(rng, 30)
    for H in structures:
        lc, b, ch = levi_civita(H), bismut(H), chern(H)
        for C in (lc, b, ch):
            assert metric_defect(H, C) < 1e-10
        for C in (b, ch):
            assert j_defect(H, C) < 1e-10
        assert np.abs(torsion_tensor(H, lc)).max() < 1e-12
        T3 = torsion_3form(H, b)
        assert T3.allclose(H.dc(H.omega), atol=1e-10)
        Tc = torsion_tensor(H, ch)
        TJJ = np.einsum("ai,bj,abk->ijk", H.J, H.J, Tc)
        assert np.abs(Tc + TJJ).max() < 1e-10
        # nabla^B - nabla^LC = T^B / 2 after lowering
        diff = np.einsum("ijm,mk->ijk", b.gamma - lc.gamma, H.g)
        np.testing.assert_allclose(diff, 0.5 * T3.to_tensor().real, atol=1e-10)


def test_torsion_of_almost_abelian():
    rng = np.random.default_rng(3)
    spec = aa.random_spec(rng, 3)
    H = aa.build(spec)
    T = torsion_3form(H, bismut(H)).to_tensor().real
    last = H.dim - 1
    expected = np.zeros_like(T)
    for q, vq in enumerate(spec.v):
        for (i, j, k), s in [((0, q + 1, last), 1), ((q + 1, last, 0), 1), ((last, 0, q + 1), 1),
                             ((q + 1, 0, last), -1), ((0, last, q + 1), -1), ((last, q + 1, 0), -1)]:
            expected[i, j, k] = -s * vq
    np.testing.assert_allclose(T, expected, atol=1e-12)


def test_calabi_eckmann_torsion_closed():
    H = calabi_eckmann_su2su2(0)
    T = torsion_3form(H, bismut(H))
    assert T.max_abs() > 0.5
    assert H.d(T).max_abs() < 1e-12


def test_parallel_torsion_on_kahler_like_instances():
    rng = np.random.default_rng(4)
    for n in (2, 3, 4):
        H = aa.build(aa.random_kahler_like_spec(rng, n))
        B = bismut(H)
        assert np.abs(nabla_tensor(B, torsion_3form(H, B).to_tensor())).max() < 1e-10
    K = kodaira_surface()
    assert not nabla_form(K, bismut(K), InvariantForm.zero(4, 2)).any()


def test_curvature_examples():
    rng = np.random.default_rng(5)
    for _ in range(10):
        spec = aa.random_spec(rng, 3, skew=True)
        H = aa.build(spec)
        R = curvature(H, bismut(H))
        last = H.dim - 1
        assert R[0, last, 0, last] == pytest.approx(spec.a ** 2 + spec.v @ spec.v)
        assert np.abs(R + R.transpose(1, 0, 2, 3)).max() < 1e-12
        assert np.abs(R + R.transpose(0, 1, 3, 2)).max() < 1e-12
        for q in range(len(spec.v)):
            y = np.eye(len(spec.v))[q]
            assert R[last, q + 1, 0, last] == pytest.approx(-spec.v @ spec.A @ y, abs=1e-12)
    flat = aa.build(aa.AlmostAbelianSpec(0.0, np.zeros(4), aa.random_spec(rng, 3).A))
    assert np.abs(curvature(flat, bismut(flat))).max() < 1e-12
    assert not curvature(flat_torus(2), bismut(flat_torus(2))).any()


def test_levi_civita_first_bianchi():
    for name, H in corpus_structures():
        assert np.abs(cyclic_sum(curvature(H, levi_civita(H)))).max() < 1e-10, name


def test_ricci_forms_on_surfaces():
    K = kodaira_surface()
    theta = K.lee_form().theta.real
    dJt = K.d(K.J_form(theta))
    rho_c, _ = ricci_form(K, chern(K))
    rho_b, b = ricci_form(K, bismut(K))
    assert rho_c.max_abs() < 1e-14                     # h = 0
    assert rho_b.allclose(dJt)                         # Bismut coefficient 1
    assert b == pytest.approx(-2.0)                    # b = -2 h_B |theta|^2
    Hs = hopf_surface()
    rho_c, _ = ricci_form(Hs, chern(Hs))
    assert rho_c.allclose(-Hs.d(Hs.J_form(Hs.lee_form().theta.real)))
    rho, b = ricci_form(flat_torus(2), bismut(flat_torus(2)))
    assert rho.max_abs() == 0 and b == 0
    with pytest.raises(ValueError):
        ricci_form(K, levi_civita(K))


def test_scalar_identity_on_surfaces():
    rng = np.random.default_rng(6)
    for H0 in (kodaira_surface(), hopf_surface()):
        for _ in range(3):
            H = H0.with_metric(random_compatible_metric(rng, H0.J, H0.g))
            _, b = ricci_form(H, bismut(H))
            s = riemannian_scalar(H)
            theta2 = H.lee_form().norm2
            dw2 = H.form_norm(H.d(H.omega)) ** 2
            assert dw2 == pytest.approx(theta2, abs=1e-12)
            assert b == pytest.approx(s - 2 * theta2 + 0.5 * dw2, abs=1e-10)


def test_ricci_identity_on_random_structures():
    rng = np.random.default_rng(7)
    for H in random_integrable_structures(rng, 20):
        assert ricci_identity_residual(H) < 1e-10


def test_connection_json():
    obj = bismut(kodaira_surface()).to_json()
    assert obj["kind"] == Kind.BISMUT.value
