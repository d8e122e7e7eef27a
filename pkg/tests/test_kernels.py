"""Both kernel backends must agree with each other and with plain numpy."""
import numpy as np
import pytest

from cavitysim import kernels
from oracles import random_hermitian


@pytest.fixture
def both():
    if "numba" not in kernels._IMPLS:
        pytest.skip("numba unavailable")
    return kernels._IMPLS["numba"], kernels._IMPLS["numpy"]


def test_jacobi_backends_agree(both, rng):
    mats = np.array([random_hermitian(rng, 4) for _ in range(50)])
    (jn, *_), (jp, *_) = both
    wn, vn, _ = jn(mats, 1e-14, 100)
    wp, vp, _ = jp(mats, 1e-14, 100)
    assert np.abs(wn - wp).max() < 1e-13
    for i in range(mats.shape[0]):
        assert np.abs(mats[i] @ vp[i] - vp[i] * wp[i]).max() < 1e-12


def test_jacobi_converges_quickly(rng):
    mats = np.array([random_hermitian(rng, 4) for _ in range(50)])
    _, _, sweeps = kernels.jacobi_batch(mats)
    assert sweeps.max() <= 10


def test_jacobi_diagonal_input_needs_no_sweep():
    _, _, sweeps = kernels.jacobi_batch(np.diag([3.0, 1.0, 2.0])[None].astype(complex))
    assert sweeps[0] == 0


def test_conjugate_blocks_backends(both, rng):
    u = np.array([np.linalg.qr(rng.normal(size=(4, 4)))[0] for _ in range(5)]).astype(complex)
    omega = rng.normal(size=(5, 5, 4, 4)) + 1j * rng.normal(size=(5, 5, 4, 4))
    omega[1, 3] = 0
    ref = np.einsum("nij,nvjk,vlk->nvil", u, omega, u.conj())
    for impl in both:
        assert np.abs(impl[1](u, omega) - ref).max() < 1e-13


def test_mixture_blocks_backends(both, rng):
    u = rng.normal(size=(6, 4, 4)) + 1j * rng.normal(size=(6, 4, 4))
    amps = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
    w = np.array([0.1, 0.0, 0.6, 0.3])
    phi = u * amps[:, None, :]
    ref = np.einsum("j,aij,bzj->abiz", w, phi, phi.conj())
    for impl in both:
        assert np.abs(impl[3](u, amps, w) - ref).max() < 1e-13


def test_husimi_backends(both, rng):
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = a @ a.conj().T
    x = np.linspace(-3, 3, 7)
    y = np.linspace(-2, 2, 5)
    qn = kernels._husimi_numba(rho, x, y)
    qp = kernels._husimi_numpy(rho, x, y)
    assert qn.shape == (5, 7)
    assert np.abs(qn - qp).max() < 1e-13


def test_set_backend_roundtrip():
    previous = kernels.set_backend("numpy")
    assert kernels.BACKEND == "numpy"
    kernels.set_backend(previous)
    assert kernels.BACKEND == previous


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_env_flag(monkeypatch):
    monkeypatch.setenv("CAVITYSIM_NUMBA", "off")
    assert not kernels._env_wants_numba()
    monkeypatch.setenv("CAVITYSIM_NUMBA", "1")
    assert kernels._env_wants_numba()
