import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavitysim.linalg import (
    NotHermitianError, NotPSDError, charpoly_4x4, check_hermitian, eigvals_general_4x4,
    hermitian_eigen, hermitian_eigen_batch, psd_sqrt,
)
from oracles import random_hermitian, random_unitary


def test_identity_spectrum(backend):
    w, v = hermitian_eigen(np.eye(4))
    assert np.allclose(w, 1.0)
    assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-14)


def test_pauli_x(backend):
    w, v = hermitian_eigen([[0, 1], [1, 0]])
    assert np.allclose(w, [-1, 1], atol=1e-15)


def test_one_by_one():
    w, v = hermitian_eigen([[3.5]])
    assert w.tolist() == [3.5] and v.tolist() == [[1]]


def test_random_reconstruction(backend, rng):
    for d in (2, 3, 4, 7, 16):
        m = random_hermitian(rng, d)
        w, v = hermitian_eigen(m)
        assert np.all(np.diff(w) >= 0)
        assert np.abs(m @ v - v * w).max() < 1e-10
        assert np.abs(v.conj().T @ v - np.eye(d)).max() < 1e-10
        assert np.abs(w - np.linalg.eigvalsh(m)).max() < 1e-12


def test_degenerate_spectrum(backend, rng):
    u = random_unitary(rng, 4)
    m = u @ np.diag([1.0, 1.0, 1.0, -2.0]) @ u.conj().T
    m = 0.5 * (m + m.conj().T)
    w, v = hermitian_eigen(m)
    assert np.allclose(w, [-2, 1, 1, 1], atol=1e-13)
    assert np.abs(m @ v - v * w).max() < 1e-10
    assert np.abs(v.conj().T @ v - np.eye(4)).max() < 1e-10


def test_deterministic(rng):
    m = random_hermitian(rng, 4)
    a = hermitian_eigen(m)
    b = hermitian_eigen(m.copy())
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_unitary_invariance(rng):
    m = random_hermitian(rng, 4)
    u = random_unitary(rng, 4)
    w1, _ = hermitian_eigen(m)
    w2, _ = hermitian_eigen(u @ m @ u.conj().T)
    assert np.abs(w1 - w2).max() < 1e-9


def test_rejects_non_hermitian():
    m = np.eye(3, dtype=complex)
    m[0, 2] = 0.5
    with pytest.raises(NotHermitianError, match=r"M\[0,2\]|M\[2,0\]"):
        hermitian_eigen(m)


def test_rejects_non_square():
    with pytest.raises(ValueError):
        hermitian_eigen(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        check_hermitian(np.zeros(3))


def test_batch_matches_single(backend, rng):
    mats = np.array([random_hermitian(rng, 4) for _ in range(20)])
    w, v = hermitian_eigen_batch(mats)
    for i, m in enumerate(mats):
        assert np.abs(m @ v[i] - v[i] * w[i]).max() < 1e-10


def test_batch_reports_offending_matrix():
    mats = np.array([np.eye(2), [[0, 1], [0, 0]]], dtype=complex)
    with pytest.raises(NotHermitianError, match="matrix 1"):
        hermitian_eigen_batch(mats)


def test_psd_sqrt_diagonal():
    assert np.allclose(psd_sqrt(np.diag([4.0, 1.0])), np.diag([2.0, 1.0]))


def test_psd_sqrt_zero():
    assert np.array_equal(psd_sqrt(np.zeros((3, 3))), np.zeros((3, 3)))


def test_psd_sqrt_squares_back(rng):
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    m = a.conj().T @ a
    s = psd_sqrt(m)
    assert np.abs(s @ s - m).max() < 1e-9
    assert np.abs(s - s.conj().T).max() < 1e-14
    assert np.linalg.eigvalsh(s).min() > -1e-12


def test_psd_sqrt_clamps_tiny_negative():
    s = psd_sqrt(np.diag([1.0, -1e-13]))
    assert np.allclose(s, np.diag([1.0, 0.0]))


def test_psd_sqrt_rejects_negative():
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_general_eigs_diagonal():
    w = eigvals_general_4x4(np.diag([1.0, 2.0, 3.0, 4.0]))
    assert np.allclose(np.sort(w.real), [1, 2, 3, 4], atol=1e-12)
    assert np.abs(w.imag).max() < 1e-12


def test_general_eigs_nilpotent():
    w = eigvals_general_4x4(np.diag([1.0, 1.0, 1.0], 1))
    assert np.abs(w).max() < 1e-12


def test_charpoly_matches_numpy(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(charpoly_4x4(m), np.poly(m), atol=1e-10)


def test_general_eigs_rejects_wrong_shape():
    with pytest.raises(ValueError):
        eigvals_general_4x4(np.eye(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_general_eigs_vieta(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    w = eigvals_general_4x4(m)
    assert abs(w.sum() - np.trace(m)) < 1e-8
    assert abs(np.prod(w) - np.linalg.det(m)) < 1e-8
    assert np.allclose(np.sort_complex(w), np.sort_complex(np.linalg.eigvals(m)), atol=1e-7)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=6))
def test_hermitian_eigen_property(seed, d):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, d)
    w, v = hermitian_eigen(m)
    assert np.abs(m @ v - v * w).max() < 1e-10
    assert np.abs(v.conj().T @ v - np.eye(d)).max() < 1e-10
