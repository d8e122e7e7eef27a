"""Two qubits exchanging k photons with one cavity mode: exact block dynamics.

The interaction Hamiltonian conserves the excitation label ``n`` and acts inside
the span of

    Psi_1 = |e, e, n-k>,  Psi_2 = |g, e, n>,  Psi_3 = |e, g, n>,  Psi_4 = |g, g, n+k>

(qubit 1, qubit 2, photons).  States with a negative photon number are dropped,
so labels ``0 <= n < k`` give 3x3 blocks and labels ``-k <= n < 0`` carry the
single state ``|g, g, n+k>``.  A density operator is stored as one 4x4
coefficient matrix per ordered pair of labels ``(n, v)``; absent basis states
keep zero rows and columns.

Operator conventions used for the Stark terms: ``sigma_- sigma_+ = |g><g|`` and
``sigma_+ sigma_- = |e><e|`` per qubit, with the photon number taken from the
basis state itself.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np

from . import kernels
from .linalg import hermitian_eigen_batch

PSI_LABELS = ("ee", "ge", "eg", "gg")
# position of each Psi_i in the two-qubit basis (|ee>, |eg>, |ge>, |gg>)
PSI_TO_QUBIT = (0, 2, 1, 3)


def psi_offsets(k):
    """Photon number of Psi_1..Psi_4 relative to the block label."""
    return (-k, 0, 0, k)


def falling_sqrt(n, k):
    """``sqrt(n! / (n-k)!)``, zero when ``n < k``."""
    if n < k or n < 0:
        return 0.0
    return math.sqrt(float(math.prod(range(n - k + 1, n + 1))))


@dataclass(frozen=True)
class ModelParams:
    """Constants of the interaction Hamiltonian (hbar = 1).

    ``beta{a}_{i}`` is the Stark coefficient ``beta_a`` of qubit ``i``:
    ``beta1`` shifts the ground level and ``beta2`` the excited level, both in
    proportion to the photon number.  Stark terms only act when ``k > 1``.
    The bare frequencies ``omega``, ``omega1``, ``omega2`` enter only the free
    part of the Hamiltonian, which commutes with the interaction; they are kept
    for bookkeeping.
    """

    k: int = 1
    gamma1: complex = 1.0
    gamma2: complex = 0.0
    delta: float = 0.0
    beta1_1: float = 0.0
    beta1_2: float = 0.0
    beta2_1: float = 0.0
    beta2_2: float = 0.0
    omega: float | None = None
    omega1: float | None = None
    omega2: float | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"photon multiplicity k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        for name in ("delta", "beta1_1", "beta1_2", "beta2_1", "beta2_2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")

    @property
    def theta_flag(self):
        return 0 if self.k == 1 else 1

    def stark_ratio(self, qubit=1):
        b1 = self.beta1_1 if qubit == 1 else self.beta1_2
        b2 = self.beta2_1 if qubit == 1 else self.beta2_2
        if not b1 > 0:
            raise ValueError(f"Stark ratio needs beta1 > 0 for qubit {qubit}, got {b1}")
        return math.sqrt(b2 / b1)

    def with_stark(self, beta1, ratio):
        """Same shifts on both qubits with ``beta2 = ratio**2 * beta1``."""
        b2 = ratio * ratio * beta1
        return replace(self, beta1_1=beta1, beta1_2=beta1, beta2_1=b2, beta2_2=b2)

    @property
    def time_scale(self):
        """``|gamma1|``; multiply a time by this to get the scaled ``gamma1 t``."""
        g = abs(self.gamma1)
        return g if g > 0 else 1.0


@dataclass(frozen=True)
class AtomPrep:
    """Each qubit starts in ``cos^2(theta)|e><e| + sin^2(theta)|g><g|``."""

    theta1: float = 0.0
    theta2: float = 0.0

    @property
    def weights(self):
        """Branch weights ordered like Psi_1..Psi_4 (ee, ge, eg, gg)."""
        c1, s1 = math.cos(self.theta1) ** 2, math.sin(self.theta1) ** 2
        c2, s2 = math.cos(self.theta2) ** 2, math.sin(self.theta2) ** 2
        return np.array([c1 * c2, s1 * c2, c1 * s2, s1 * s2])

    def qubit_density(self, which):
        th = self.theta1 if which == 1 else self.theta2
        return np.diag([math.cos(th) ** 2, math.sin(th) ** 2]).astype(complex)

    def density(self):
        """Initial two-qubit state in the basis (|ee>, |eg>, |ge>, |gg>)."""
        return np.kron(self.qubit_density(1), self.qubit_density(2))


@dataclass(frozen=True, eq=False)
class BlockEigen:
    n: int
    basis: tuple
    hamiltonian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return len(self.basis)


def present_states(n, k):
    """Indices (0-based) of the Psi states that exist in block ``n``."""
    return tuple(i for i, off in enumerate(psi_offsets(k)) if n + off >= 0)


def _padded_block(params, n):
    k = params.k
    g1, g2 = complex(params.gamma1), complex(params.gamma2)
    stark = params.theta_flag
    ph = [n + off for off in psi_offsets(k)]
    h = np.zeros((4, 4), dtype=np.complex128)
    h[0, 0] = 2 * params.delta + stark * ph[0] * (params.beta2_1 + params.beta2_2)
    h[1, 1] = stark * ph[1] * (params.beta1_1 + params.beta2_2)
    h[2, 2] = stark * ph[2] * (params.beta2_1 + params.beta1_2)
    h[3, 3] = -2 * params.delta + stark * ph[3] * (params.beta1_1 + params.beta1_2)
    lower = falling_sqrt(n, k)
    upper = falling_sqrt(n + k, k)
    h[0, 1] = g1 * lower
    h[0, 2] = g2 * lower
    h[1, 3] = g2 * upper
    h[2, 3] = g1 * upper
    h += np.triu(h, 1).conj().T
    keep = np.array([p >= 0 for p in ph])
    h[~keep, :] = 0
    h[:, ~keep] = 0
    return h


def build_block(params, n):
    """Matrix of the interaction Hamiltonian on block ``n`` (dimension <= 4).

    Rows and columns follow the order Psi_1..Psi_4 with absent states removed.
    Labels down to ``-k`` are accepted; below zero only ``|g,g,n+k>`` remains.
    """
    if n < -params.k:
        raise ValueError(f"block label must be >= -k = {-params.k}, got {n}")
    idx = present_states(n, params.k)
    return _padded_block(params, n)[np.ix_(idx, idx)]


def eigen_blocks(params, n_max, n_min=0):
    """Diagonalize every block with label ``n_min..n_max``."""
    if n_max < params.k:
        raise ValueError(f"n_max must be >= k = {params.k}, got {n_max}")
    blocks = []
    by_dim = {}
    for n in range(n_min, n_max + 1):
        by_dim.setdefault(len(present_states(n, params.k)), []).append(n)
    solved = {}
    for dim, labels in by_dim.items():
        mats = np.array([build_block(params, n) for n in labels])
        w, v = hermitian_eigen_batch(mats)
        for i, n in enumerate(labels):
            solved[n] = (mats[i], w[i], v[i])
    for n in range(n_min, n_max + 1):
        h, w, v = solved[n]
        blocks.append(BlockEigen(n, present_states(n, params.k), h, w, v))
    return blocks


class Propagator:
    """Spectral propagator over labels ``-k..n_top`` in padded 4x4 form."""

    def __init__(self, params, n_top):
        self.params = params
        self.k = params.k
        self.n_min = -params.k
        self.n_top = int(n_top)
        blocks = eigen_blocks(params, self.n_top, n_min=self.n_min)
        size = len(blocks)
        self.present = np.zeros((size, 4), dtype=bool)
        self.eigvals = np.zeros((size, 4))
        self.eigvecs = np.broadcast_to(np.eye(4, dtype=np.complex128), (size, 4, 4)).copy()
        self.hamiltonian = np.zeros((size, 4, 4), dtype=np.complex128)
        for j, blk in enumerate(blocks):
            idx = list(blk.basis)
            self.present[j, idx] = True
            self.eigvals[j, : blk.dim] = blk.eigenvalues
            vec = np.eye(4, dtype=np.complex128)
            # absent states keep unit vectors in the padded slots
            fill = [i for i in range(4) if i not in idx]
            vec[:, :] = 0
            vec[np.ix_(idx, range(blk.dim))] = blk.eigenvectors
            for col, i in zip(range(blk.dim, 4), fill):
                vec[i, col] = 1.0
            self.eigvecs[j] = vec
            self.hamiltonian[j][np.ix_(idx, idx)] = blk.hamiltonian
        self.blocks = blocks

    def unitary(self, t):
        phase = np.exp(-1j * self.eigvals * t)
        return np.matmul(self.eigvecs * phase[:, None, :], np.conj(np.swapaxes(self.eigvecs, 1, 2)))

    def evolve(self, omega0, t):
        return kernels.conjugate_blocks(self.unitary(t), omega0)


@lru_cache(maxsize=32)
def propagator(params, n_top):
    return Propagator(params, n_top)


@dataclass(eq=False)
class JointDensity:
    """Density operator on qubit 1 x qubit 2 x Fock space in block form.

    ``omega[a, b]`` is the 4x4 coefficient matrix ``Omega_iz(n, v)`` for labels
    ``n = n_min + a`` and ``v = n_min + b``, so that

        rho = sum_{n, v, i, z} Omega_iz(n, v) |Psi_i(n)><Psi_z(v)|.
    """

    omega: np.ndarray
    k: int
    n_min: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.omega.shape[0]

    @property
    def labels(self):
        return np.arange(self.n_min, self.n_min + self.size)

    @property
    def n_top(self):
        return self.n_min + self.size - 1

    @property
    def n_photons(self):
        """Number of Fock levels ``0..n_top+k`` touched by the blocks."""
        return self.n_top + self.k + 1

    def present(self):
        offs = np.array(psi_offsets(self.k))
        return (self.labels[:, None] + offs[None, :]) >= 0

    def block(self, n, v):
        """``Omega(n, v)`` restricted to the states present in each block."""
        a, b = n - self.n_min, v - self.n_min
        rows = present_states(n, self.k)
        cols = present_states(v, self.k)
        return self.omega[a, b][np.ix_(rows, cols)]

    def trace(self):
        diag = np.einsum("aaii->", self.omega)
        return float(diag.real)

    def hermiticity_defect(self):
        return float(np.abs(self.omega - np.conj(self.omega.transpose(1, 0, 3, 2))).max())

    def dense_indices(self):
        """Flat index ``qubit * n_photons + photon`` for every (label, Psi) slot."""
        offs = np.array(psi_offsets(self.k))
        photon = self.labels[:, None] + offs[None, :]
        qubit = np.array(PSI_TO_QUBIT)[None, :]
        return qubit * self.n_photons + photon

    def to_dense(self):
        """Full matrix in the basis ``|q1 q2> (x) |p>`` ordered (ee, eg, ge, gg) x p."""
        dim = 4 * self.n_photons
        out = np.zeros((dim, dim), dtype=np.complex128)
        mask = self.present().ravel()
        idx = self.dense_indices().ravel()[mask]
        flat = self.omega.transpose(0, 2, 1, 3).reshape(self.size * 4, self.size * 4)
        out[np.ix_(idx, idx)] = flat[np.ix_(mask, mask)]
        return out


def _field_vector(field_state, n_photons):
    f = np.zeros(n_photons, dtype=np.complex128)
    f[: field_state.amplitudes.size] = field_state.amplitudes
    return f


def branch_amplitudes(field_state, k, n_top):
    """``F[a, i]``: initial amplitude on Psi_i of label ``n_min + a`` (unit weights)."""
    labels = np.arange(-k, n_top + 1)
    f = _field_vector(field_state, n_top + k + 1)
    out = np.zeros((labels.size, 4), dtype=np.complex128)
    for i, off in enumerate(psi_offsets(k)):
        ph = labels + off
        ok = (ph >= 0) & (ph < f.size)
        out[ok, i] = f[ph[ok]]
    return out


def joint_from_weights(weights, field_state, k):
    """Initial mixture ``sum_i w_i |a_i><a_i| (x) |psi><psi|`` in block form."""
    n_top = field_state.n_max + k
    amps = branch_amplitudes(field_state, k, n_top)
    size = amps.shape[0]
    omega = np.zeros((size, size, 4, 4), dtype=np.complex128)
    for i in range(4):
        if weights[i] != 0.0:
            omega[:, :, i, i] = weights[i] * np.outer(amps[:, i], amps[:, i].conj())
    return JointDensity(omega, k, -k)


def initial_joint(prep, field_state, k=1):
    """``rho(0) = rho_qubits(0) (x) |psi><psi|`` in block form."""
    return joint_from_weights(prep.weights, field_state, k)


def _check_time(t):
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    return t


class ExactEngine:
    """Exact evolution for one parameter set and initial field.

    Diagonalizes the blocks once.  The initial state is a mixture of product
    branches, so each call propagates the four branch vectors and rebuilds the
    block coefficients from them instead of conjugating every block pair.
    """

    name = "exact"

    def __init__(self, params, field_state):
        self.params = params
        self.field = field_state
        self.k = params.k
        self.propagator = propagator(params, field_state.n_max + params.k)
        self.amplitudes = branch_amplitudes(field_state, self.k, self.propagator.n_top)

    def initial(self, prep):
        return initial_joint(prep, self.field, self.k)

    def _evolve_weights(self, weights, t):
        if t == 0.0:
            return joint_from_weights(np.asarray(weights, dtype=float), self.field, self.k)
        u = self.propagator.unitary(t)
        omega = kernels.mixture_blocks(u, self.amplitudes, np.asarray(weights, dtype=float))
        return JointDensity(omega, self.k, -self.k)

    def evolve(self, prep, t):
        return self._evolve_weights(prep.weights, _check_time(t))

    def evolve_branches(self, t):
        """Evolved unit-weight branches ee, ge, eg, gg (same order as Psi)."""
        t = _check_time(t)
        return [self._evolve_weights(np.eye(4)[i], t) for i in range(4)]


def evolve_exact(prep, field_state, params, t):
    """``U(t) rho(0) U(t)^H`` with ``U = R exp(-i t diag(lambda)) R^H`` per block."""
    return ExactEngine(params, field_state).evolve(prep, t)


def interaction_energy(rho, params):
    """``Tr(rho H_in)``; only same-label blocks contribute."""
    prop = propagator(params, rho.n_top)
    diag = rho.omega[np.arange(rho.size), np.arange(rho.size)]
    return float(np.einsum("aij,aji->", diag, prop.hamiltonian).real)
