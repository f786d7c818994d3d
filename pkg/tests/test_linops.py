import numpy as np
import pytest

from hkdicho import (DegenerateSubspaceError, matrix_gain, operator_norm,
                     restricted_gain, sample_unit_vectors, subspace_basis,
                     vector_norm)

from oracles import dense_sphere_gain


def test_vector_and_operator_norms():
    x = np.array([3.0, -4.0])
    assert vector_norm(x, "max") == 4.0
    assert vector_norm(x, "sum") == 7.0
    assert vector_norm(x, "euclid") == 5.0
    M = np.array([[1.0, -2.0], [0.5, 0.0]])
    assert operator_norm(M, "max") == 3.0   # max row sum
    assert operator_norm(M, "sum") == 2.0   # max column sum


def test_subspace_basis_rank():
    M = np.array([[1.0, 2.0], [2.0, 4.0]])
    basis = subspace_basis(M)
    assert basis.shape == (2, 1)
    assert np.allclose(basis.T @ basis, 1.0)


def test_identity_gain_is_one():
    g = matrix_gain(np.eye(3), kind="max", mode="sup")
    assert g.value == pytest.approx(1.0) and g.method == "exact"


def test_scalar_action_on_line():
    M = np.diag([0.5, 2.0])
    basis = np.array([[0.0], [1.0]])
    g = matrix_gain(M, kind="max", mode="inf", basis=basis)
    assert g.value == pytest.approx(2.0) and g.method == "exact"


def test_restricted_gain_shear_ratio(shear_d):
    # sup gain on the forward range times h_m/h_n is (1+n)/(1+m)
    basis = shear_d.P.range_basis(1)
    g = restricted_gain(shear_d.E, basis, 3, 1)
    ratio = shear_d.h.ratio(3, 1) * g.value
    assert ratio == pytest.approx(0.5, rel=1e-12)
    assert g.method == "exact"


def test_sup_dominates_inf_sampled():
    rng = np.random.default_rng(3)
    M = rng.standard_normal((3, 3))
    basis = np.linalg.qr(rng.standard_normal((3, 2)))[0]
    sup = matrix_gain(M, "max", "sup", basis)
    inf = matrix_gain(M, "max", "inf", basis)
    assert sup.method == "sampled" and inf.method == "sampled"
    assert sup.value >= inf.value


def test_gain_scaling_is_exact_on_lines():
    M = np.array([[0.7, 0.1], [0.0, 1.3]])
    basis = np.array([[1.0], [0.5]])
    base = matrix_gain(M, "max", "sup", basis).value
    scaled = matrix_gain(4.0 * M, "max", "sup", basis).value
    assert scaled == pytest.approx(4.0 * base, rel=0, abs=0)


def test_vertex_sup_beats_dense_sampling():
    rng = np.random.default_rng(11)
    for _ in range(5):
        M = rng.standard_normal((3, 3))
        exact = matrix_gain(M, "max", "sup").value
        brute = dense_sphere_gain(M, "max", "sup")
        assert exact >= brute - 1e-12
        assert exact <= brute * 1.5   # vertices are reachable directions


def test_sum_norm_sup_is_column_sum():
    M = np.array([[1.0, -3.0], [2.0, 0.5]])
    g = matrix_gain(M, "sum", "sup")
    assert g.value == pytest.approx(3.5) and g.method == "exact"


def test_euclid_gain_matches_svd():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((4, 4))
    sv = np.linalg.svd(M, compute_uv=False)
    assert matrix_gain(M, "euclid", "sup").value == pytest.approx(sv[0])
    assert matrix_gain(M, "euclid", "inf").value == pytest.approx(sv[-1])


def test_singular_full_space_inf_is_zero():
    M = np.array([[1.0, 0.0], [0.0, 0.0]])
    g = matrix_gain(M, "max", "inf")
    assert g.value == 0.0 and g.method == "exact"


def test_degenerate_subspace_rejected():
    with pytest.raises(DegenerateSubspaceError):
        matrix_gain(np.eye(2), "max", "sup", np.zeros((2, 1)))
    with pytest.raises(DegenerateSubspaceError):
        matrix_gain(np.eye(2), "max", "sup", np.zeros((2, 0)))


def test_sample_vectors_unit_norm():
    for kind in ("max", "sum", "euclid"):
        X = sample_unit_vectors(3, kind)
        assert np.allclose(np.abs(X).max(axis=1) if kind == "max"
                           else np.abs(X).sum(axis=1) if kind == "sum"
                           else np.linalg.norm(X, axis=1), 1.0)


def test_sample_vectors_deterministic():
    a = sample_unit_vectors(2, "max")
    b = sample_unit_vectors(2, "max")
    assert np.array_equal(a, b)
