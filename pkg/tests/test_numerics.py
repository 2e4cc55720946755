import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onebit_mimo.numerics import (DomainError, IllConditionedError, RngStream, derive_stream_id,
                                  elementwise_arcsine_map, hermitian_solve, is_hermitian,
                                  sample_complex_gaussian, svd, svd_factored)


def crandn(gen, *shape):
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2)


# ---------------------------------------------------------------- svd
def test_svd_identity():
    _, s, _ = svd(np.eye(3))
    np.testing.assert_allclose(s, [1, 1, 1])


def test_svd_diagonal_complex():
    U, s, V = svd(np.diag([3, 2j]))
    np.testing.assert_allclose(s, [3, 2])
    np.testing.assert_allclose(np.abs(V), np.eye(2), atol=1e-12)
    # phase convention: largest entry of each right vector is real-positive
    np.testing.assert_allclose(V, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("shape", [(8, 6), (6, 8), (64, 64), (1, 5)])
def test_svd_reconstruction(shape):
    gen = np.random.default_rng(3)
    A = crandn(gen, *shape)
    U, s, V = svd(A)
    err = np.linalg.norm(A - U @ np.diag(s) @ V.conj().T) / np.linalg.norm(A)
    assert err < 1e-8
    assert np.all(np.diff(s) <= 0)
    k = len(s)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(k), atol=1e-8)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(k), atol=1e-8)


def test_svd_rejects_nan():
    with pytest.raises(DomainError):
        svd(np.array([[1.0, np.nan]]))


def test_svd_factored_matches_dense():
    gen = np.random.default_rng(4)
    L, R = crandn(gen, 40, 5), crandn(gen, 30, 5)
    A = L @ R.conj().T
    U, s, V = svd_factored(L, R)
    _, s_ref, V_ref = svd(A)
    np.testing.assert_allclose(s, s_ref[:5], rtol=1e-10)
    np.testing.assert_allclose(V, V_ref[:, :5], atol=1e-8)
    np.testing.assert_allclose(U @ np.diag(s) @ V.conj().T, A, atol=1e-10)


# ---------------------------------------------------------------- solve
def test_solve_identity():
    B = np.arange(6).reshape(3, 2) + 1j
    np.testing.assert_allclose(hermitian_solve(np.eye(3), B), B)


def test_solve_scalar():
    np.testing.assert_allclose(hermitian_solve(2 * np.eye(4), np.eye(4)), 0.5 * np.eye(4))


def test_solve_random_psd_residual():
    gen = np.random.default_rng(5)
    Mx = crandn(gen, 20, 20)
    A = Mx @ Mx.conj().T + np.eye(20)
    B = crandn(gen, 20, 3)
    X = hermitian_solve(A, B)
    assert np.linalg.norm(A @ X - B) / np.linalg.norm(B) < 1e-8
    np.testing.assert_allclose(hermitian_solve(A, A), np.eye(20), atol=1e-8)


def test_solve_singular_names_matrix():
    A = np.diag([1.0, 1e-14])
    with pytest.raises(IllConditionedError, match="C_r_tilde"):
        hermitian_solve(A, np.eye(2), name="C_r_tilde")


def test_solve_indefinite():
    with pytest.raises(IllConditionedError):
        hermitian_solve(np.diag([1.0, -1.0]), np.eye(2))


# ---------------------------------------------------------------- arcsine
def test_arcsine_identity():
    np.testing.assert_allclose(elementwise_arcsine_map(np.eye(4)), np.pi / 2 * np.eye(4))


def test_arcsine_real_offdiag():
    out = elementwise_arcsine_map(np.array([[1, 0.5], [0.5, 1]]))
    assert out[0, 1] == pytest.approx(np.pi / 6)


def test_arcsine_complex_offdiag():
    C = np.array([[1, 0.3 + 0.4j], [0.3 - 0.4j, 1]])
    out = elementwise_arcsine_map(C)
    assert out[0, 1] == pytest.approx(np.arcsin(0.3) + 1j * np.arcsin(0.4))
    assert out[1, 0] == pytest.approx(np.arcsin(0.3) - 1j * np.arcsin(0.4))


def test_arcsine_normalizes_by_diagonal():
    C = np.array([[4, 1], [1, 1]])
    assert elementwise_arcsine_map(C)[0, 1] == pytest.approx(np.arcsin(0.5))


def test_arcsine_clamps_rounding_drift():
    C = np.array([[1, 1 + 5e-10], [1 + 5e-10, 1]])
    assert elementwise_arcsine_map(C)[0, 1] == pytest.approx(np.pi / 2)


def test_arcsine_domain_errors():
    with pytest.raises(DomainError):
        elementwise_arcsine_map(np.diag([1.0, 0.0]))
    with pytest.raises(DomainError):
        elementwise_arcsine_map(np.array([[1, 1.1], [1.1, 1]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_arcsine_output_hermitian(n, k, seed):
    gen = np.random.default_rng(seed)
    W = crandn(gen, n, k)
    C = W @ W.conj().T + 1e-3 * np.eye(n)
    out = elementwise_arcsine_map(C)
    assert np.max(np.abs(out - out.conj().T)) <= 1e-12 * np.max(np.abs(out))


# ---------------------------------------------------------------- sampling
def test_gaussian_identity_moments():
    z = sample_complex_gaussian(RngStream(1, 2), 2, draws=10**6)
    assert np.all(np.abs(z.mean(axis=1)) < 5e-3)
    emp = z @ z.conj().T / z.shape[1]
    np.testing.assert_allclose(emp, np.eye(2), atol=1e-2)
    # circular symmetry: pseudo-covariance vanishes
    assert np.max(np.abs(z @ z.T / z.shape[1])) < 1e-2


def test_gaussian_scalar_power():
    z = sample_complex_gaussian(RngStream(9), 1, draws=10**6)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=1e-2)


def test_gaussian_covariance():
    C = np.array([[2, 0.5 + 0.5j, 0], [0.5 - 0.5j, 1, 0.2j], [0, -0.2j, 0.5]])
    z = sample_complex_gaussian(RngStream(3), 3, C, draws=10**6)
    np.testing.assert_allclose(z @ z.conj().T / z.shape[1], C, atol=1e-2)


def test_gaussian_zero_covariance():
    z = sample_complex_gaussian(RngStream(3), 4, np.zeros((4, 4)))
    assert np.all(z == 0)


def test_gaussian_rejects_non_psd():
    with pytest.raises(DomainError):
        sample_complex_gaussian(RngStream(3), 2, np.diag([1.0, -1.0]))


def test_streams_reproducible_and_distinct():
    a = RngStream(11, 5).generator.standard_normal(100)
    b = RngStream(11, 5).generator.standard_normal(100)
    c = RngStream(11, 6).generator.standard_normal(100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.3


def test_stream_id_stable():
    assert derive_stream_id("channel", 16, 16, 0) == derive_stream_id("channel", 16, 16, 0)
    assert derive_stream_id("channel", 16, 16, 0) != derive_stream_id("noise", 16, 16, 0)
    assert 0 <= derive_stream_id("x") < 2**64


def test_is_hermitian_relative():
    A = np.array([[1e6, 1 + 1j], [1 - 1j, 2]])
    assert is_hermitian(A)
    assert not is_hermitian(A + np.array([[0, 1], [0, 0]]) * 1e3)


def test_arcsine_diagonal_exact_for_awkward_scales():
    gen = np.random.default_rng(8)
    for _ in range(50):
        W = crandn(gen, 5, 2) * 10 ** gen.uniform(-3, 3)
        out = elementwise_arcsine_map(W @ W.conj().T)
        assert np.all(np.diagonal(out) == np.pi / 2)
