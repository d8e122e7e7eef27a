"""Independent reference implementations used only by the tests.

Everything here works on the full tensor-product space with plain numpy and
scipy, without the block bookkeeping of the package.
"""
import numpy as np
import scipy.linalg as sl

SP = np.array([[0.0, 1.0], [0.0, 0.0]])  # |e><g| with |e> = index 0
SM = SP.T
I2 = np.eye(2)


def full_hamiltonian(params, n_photons):
    """Interaction Hamiltonian on qubit1 x qubit2 x Fock(0..n_photons-1)."""
    a = np.diag(np.sqrt(np.arange(1, n_photons)), 1)
    ak = np.linalg.matrix_power(a, params.k)
    ip = np.eye(n_photons)

    def q1(o):
        return np.kron(np.kron(o, I2), ip)

    def q2(o):
        return np.kron(np.kron(I2, o), ip)

    def fo(o):
        return np.kron(np.kron(I2, I2), o)

    h = params.gamma1 * q1(SP) @ fo(ak) + params.gamma2 * q2(SP) @ fo(ak)
    h = h + h.conj().T
    sz = SP @ SM - SM @ SP
    h = h + params.delta * (q1(sz) + q2(sz))
    if params.k > 1:
        num = fo(a.T @ a)
        h = h + num @ (params.beta1_1 * q1(SM @ SP) + params.beta2_1 * q1(SP @ SM)
                       + params.beta1_2 * q2(SM @ SP) + params.beta2_2 * q2(SP @ SM))
    return h


def full_initial(prep, field_state, n_photons):
    psi = np.zeros(n_photons, dtype=complex)
    psi[: field_state.amplitudes.size] = field_state.amplitudes
    return np.kron(prep.density(), np.outer(psi, psi.conj()))


def full_evolve(prep, field_state, params, t, n_photons):
    """``expm(-iHt) rho0 expm(iHt)`` by scaling and squaring."""
    u = sl.expm(-1j * t * full_hamiltonian(params, n_photons))
    r0 = full_initial(prep, field_state, n_photons)
    return u @ r0 @ u.conj().T


def partial_trace_field(rho, n_photons):
    """Naive loop over photon numbers: two-qubit state (ee, eg, ge, gg)."""
    r = rho.reshape(4, n_photons, 4, n_photons)
    out = np.zeros((4, 4), dtype=complex)
    for p in range(n_photons):
        out += r[:, p, :, p]
    return out


def partial_trace_qubits(rho, n_photons):
    r = rho.reshape(4, n_photons, 4, n_photons)
    out = np.zeros((n_photons, n_photons), dtype=complex)
    for q in range(4):
        out += r[q, :, q, :]
    return out


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def wootters_mp(rho, dps=40):
    """Concurrence from the eigenvalues of ``rho rho~`` in mpmath precision."""
    import mpmath

    with mpmath.workdps(dps):
        r = mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in np.asarray(rho)])
        sy = mpmath.matrix([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]])
        flipped = sy * r.conjugate() * sy
        ev = mpmath.eig(r * flipped, left=False, right=False)
        lam = sorted((mpmath.sqrt(max(mpmath.re(e), 0)) for e in ev), reverse=True)
        return float(max(0, lam[0] - lam[1] - lam[2] - lam[3]))


def werner(p):
    """``p |Phi+><Phi+| + (1 - p) I/4`` in the (ee, eg, ge, gg) basis."""
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return p * np.outer(phi, phi) + (1 - p) * np.eye(4) / 4
