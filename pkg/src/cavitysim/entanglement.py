"""Two-qubit entanglement: Wootters concurrence, entanglement of formation,
pure-state concurrence and the closed-form concurrence of the dispersive model.
"""
from dataclasses import dataclass
import math

import numpy as np

from .dispersive import _coefficient_arrays
from .linalg import NotPSDError, check_hermitian, hermitian_eigen, psd_sqrt

SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
NEGATIVE_TOL = 1e-10
SQRT_CUTOFF = 1e-13


class NumericalDegradationError(ArithmeticError):
    """An intermediate that must be PSD came out clearly negative."""


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    lambdas: tuple


def spin_flip(rho):
    """``(sigma_y x sigma_y) conj(rho) (sigma_y x sigma_y)`` in the product basis."""
    rho = np.asarray(rho, dtype=np.complex128)
    return SIGMA_YY @ rho.conj() @ SIGMA_YY


def concurrence_mixed(rho):
    """Wootters concurrence of a two-qubit density matrix.

    Parameters
    ----------
    rho : (4, 4) array_like
        Hermitian, positive semidefinite, basis (|ee>, |eg>, |ge>, |gg>).

    Returns
    -------
    ConcurrenceResult
        ``lambdas`` are the square roots of the eigenvalues of
        ``rho @ spin_flip(rho)`` in descending order.

    Notes
    -----
    With ``S = sqrt(rho)`` and ``T = sqrt(spin_flip(rho))`` (which equals
    ``spin_flip(S)``), the Hermitian sandwich ``S spin_flip(rho) S`` is
    ``X X^H`` for ``X = S T``.  The lambdas are the singular values of ``X``,
    read off the eigenvalues of ``[[0, X], [X^H, 0]]``; this avoids taking a
    square root of eigenvalues that roundoff pushed slightly off zero.
    """
    rho = check_hermitian(rho, name="two-qubit density")
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit density, got shape {rho.shape}")
    try:
        s = psd_sqrt(rho, tol=NEGATIVE_TOL, cutoff=SQRT_CUTOFF)
    except NotPSDError as exc:
        raise NumericalDegradationError(str(exc)) from exc
    x = s @ spin_flip(s)
    sandwich = x @ x.conj().T
    w_sandwich, _ = hermitian_eigen(0.5 * (sandwich + sandwich.conj().T))
    if w_sandwich[0] < -NEGATIVE_TOL:
        raise NumericalDegradationError(
            f"sqrt(rho) rho~ sqrt(rho) has eigenvalue {w_sandwich[0]:.3e} below -{NEGATIVE_TOL:.0e}")
    big = np.zeros((8, 8), dtype=np.complex128)
    big[:4, 4:] = x
    big[4:, :4] = x.conj().T
    w, _ = hermitian_eigen(big)
    lambdas = np.clip(w[::-1][:4], 0.0, None)
    c = max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3])
    return ConcurrenceResult(float(c), tuple(float(v) for v in lambdas))


def concurrence(rho):
    return concurrence_mixed(rho).value


def _binary_entropy(p):
    return -sum(q * math.log2(q) for q in (p, 1.0 - p) if q > 0.0)


def entanglement_of_formation(c):
    """``h((1 + sqrt(1 - c^2)) / 2)`` with ``h`` the base-2 binary entropy."""
    c = float(c)
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"concurrence must lie in [0, 1], got {c}")
    return _binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


@dataclass(frozen=True, eq=False)
class PureBipartiteState:
    """Amplitudes ``amplitudes[i, j, n]`` of ``sum |i>_A |j>_B |n>_field``.

    Subsystem A is the first qubit; subsystem B is the second qubit together
    with the field, indexed by the combined pair ``(j, n)``.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim == 2:
            amps = amps[:, :, None]
        if amps.ndim != 3 or amps.shape[0] != amps.shape[1]:
            raise ValueError(f"expected amplitudes of shape (d, d, n), got {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized: sum |amplitude|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def d(self):
        return self.amplitudes.shape[0]


def concurrence_pure_forms(psi):
    """Both pure-state expressions: ``(sqrt(2(1 - Tr rho_A^2)), determinant sum)``.

    The determinant form sums ``|p_iK p_jM - p_iM p_jK|^2`` over all ``i, j``
    and all combined indices ``K = (k, n)``, ``M = (m, n')``.
    """
    x = psi.amplitudes.reshape(psi.d, -1)
    rho_a = x @ x.conj().T
    purity = float(np.real(np.sum(rho_a * rho_a.T)))
    from_purity = math.sqrt(max(0.0, 2.0 * (1.0 - purity)))
    minors = np.einsum("iK,jM->ijKM", x, x) - np.einsum("iM,jK->ijKM", x, x)
    from_minors = math.sqrt(float(np.sum(np.abs(minors) ** 2)))
    return from_purity, from_minors


def concurrence_pure(psi, tol=1e-10):
    """Pure-state concurrence; the two closed forms must agree within ``tol``."""
    a, b = concurrence_pure_forms(psi)
    if abs(a - b) > tol:
        raise ArithmeticError(f"pure concurrence forms disagree: {a!r} vs {b!r}")
    return a


def analytic_envelope(params, field_state, t, shifted_mu=False):
    """The theta-independent factor ``sqrt(sum_n ...)`` of the closed form."""
    k = params.k
    b = np.abs(field_state.amplitudes)
    n = np.arange(k, b.size)
    if n.size == 0:
        return 0.0
    a_n, b_n, _, _ = _coefficient_arrays(params, n, t, shifted_mu)
    a_nk, b_nk, _, _ = _coefficient_arrays(params, n + k, t, shifted_mu)
    term = a_n * np.conj(b_nk) - b_n * np.conj(a_nk)
    return math.sqrt(float(np.sum(b[n] ** 2 * b[n - k] ** 2 * np.abs(term) ** 2)))


def concurrence_analytic(params, field_state, theta, t, shifted_mu=False):
    """Closed-form concurrence with qubit 1 excited and qubit 2 at angle ``theta``.

    ``C = |sin(2 theta)| / 2 * sqrt(sum_n |b_n|^2 |b_{n-k}|^2
    |A_n conj(B_{n+k}) - B_n conj(A_{n+k})|^2)`` with the dispersive
    coefficients and Fock amplitudes ``b_n`` of the initial field.  ``theta``
    may be an array.
    """
    env = analytic_envelope(params, field_state, t, shifted_mu)
    c = np.abs(np.sin(2 * np.asarray(theta, dtype=float))) / 2 * env
    return float(c) if c.ndim == 0 else c


def branch_qubit_states(engine, t):
    """Two-qubit reductions of the four unit-weight branches at time ``t``."""
    from .observables import reduce_to_qubits

    return np.array([reduce_to_qubits(r) for r in engine.evolve_branches(t)])


def theta_weights(theta1, theta2):
    c1, s1 = math.cos(theta1) ** 2, math.sin(theta1) ** 2
    c2, s2 = math.cos(theta2) ** 2, math.sin(theta2) ** 2
    return np.array([c1 * c2, s1 * c2, c1 * s2, s1 * s2])


def concurrence_slice(branches, theta1, thetas2):
    """Wootters concurrence along a theta2 axis from precomputed branch states.

    The evolved state is linear in the initial mixture, so one evolution per
    branch serves every angle.
    """
    out = np.empty(len(thetas2))
    for j, th in enumerate(thetas2):
        rho = np.tensordot(theta_weights(theta1, th), branches, axes=1)
        out[j] = concurrence_mixed(0.5 * (rho + rho.conj().T)).value
    return out
