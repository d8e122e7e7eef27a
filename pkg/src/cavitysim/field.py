"""Single-mode field states in the Fock basis: binomial, number and coherent."""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import gammainc

COHERENT_DEFICIT_TOL = 1e-10


class TruncationError(ValueError):
    """Raised when a Fock cutoff loses more probability than allowed."""


@dataclass(frozen=True, eq=False)
class FieldState:
    """Fock amplitudes ``amplitudes[n] = <n|psi>`` for ``n = 0..n_max``.

    ``kind`` is one of ``"binomial"``, ``"number"``, ``"coherent"`` and
    ``params`` holds the defining parameters (``eta``/``m``, ``m`` or
    ``alpha``).  Instances are immutable.
    """

    amplitudes: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_max(self):
        return self.amplitudes.size - 1

    @property
    def norm_deficit(self):
        return 1.0 - float(np.sum(np.abs(self.amplitudes) ** 2))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def mean_photon_number(self):
        return float(np.arange(self.amplitudes.size) @ self.probabilities())

    def padded(self, n_max):
        if n_max < self.n_max:
            raise ValueError(f"cannot pad to n_max={n_max} below current {self.n_max}")
        out = np.zeros(n_max + 1, dtype=np.complex128)
        out[: self.amplitudes.size] = self.amplitudes
        return out

    def density(self):
        return FieldDensity(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class FieldDensity:
    """Field density matrix over Fock indices ``0..n_max``."""

    matrix: np.ndarray

    @property
    def n_max(self):
        return self.matrix.shape[0] - 1

    def trace(self):
        return float(np.trace(self.matrix).real)

    def purity(self):
        return float(np.real(np.sum(self.matrix * self.matrix.T)))

    def photon_distribution(self):
        return np.real(np.diagonal(self.matrix)).copy()


def binomial_amplitudes(eta, m):
    """Binomial state ``sum_n sqrt(C(m,n) eta^n (1-eta)^(m-n)) |n>``.

    The support is exactly ``n = 0..m``; nothing is truncated.  ``eta = 0``
    gives the vacuum and ``eta = 1`` the number state ``|m>``.
    """
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if int(m) != m or m < 0:
        raise ValueError(f"m must be a non-negative integer, got {m}")
    m = int(m)
    params = {"eta": eta, "m": m}
    amps = np.zeros(m + 1)
    if eta == 0.0:
        amps[0] = 1.0
    elif eta == 1.0:
        amps[m] = 1.0
    else:
        n = np.arange(m + 1)
        # log C(m, n) accumulated term by term
        log_binom = np.concatenate(([0.0], np.cumsum(np.log((m - n[1:] + 1) / n[1:]))))
        log_p = log_binom + n * math.log(eta) + (m - n) * math.log1p(-eta)
        amps = np.exp(0.5 * log_p)
    return FieldState(amps, "binomial", params)


def number_state(m, n_max=None):
    m = int(m)
    if m < 0:
        raise ValueError(f"photon number must be non-negative, got {m}")
    n_max = m if n_max is None else int(n_max)
    if n_max < m:
        raise ValueError(f"n_max={n_max} cannot hold |{m}>")
    amps = np.zeros(n_max + 1)
    amps[m] = 1.0
    return FieldState(amps, "number", {"m": m})


def coherent_deficit(alpha, n_max):
    """Probability outside ``0..n_max`` for a coherent state of amplitude ``alpha``."""
    x = abs(alpha) ** 2
    if x == 0.0:
        return 0.0
    # P(N > n_max) for a Poisson(x) photon count
    return float(gammainc(n_max + 1, x))


def coherent_cutoff(alpha, tol=COHERENT_DEFICIT_TOL):
    """Smallest ``n_max`` whose truncation deficit is below `tol`."""
    n = max(0, int(abs(alpha) ** 2))
    while coherent_deficit(alpha, n) >= tol:
        n += 1
    return n


def coherent_amplitudes(alpha, n_max=None, tol=COHERENT_DEFICIT_TOL):
    """Truncated coherent state ``exp(-|a|^2/2) a^n / sqrt(n!)``.

    With ``n_max=None`` the smallest admissible cutoff is chosen.  An explicit
    cutoff whose deficit reaches `tol` raises :class:`TruncationError` with the
    cutoff that would be needed.
    """
    alpha = complex(alpha)
    if n_max is None:
        n_max = coherent_cutoff(alpha, tol)
    n_max = int(n_max)
    deficit = coherent_deficit(alpha, n_max)
    if deficit >= tol:
        raise TruncationError(
            f"coherent state alpha={alpha} loses {deficit:.3e} probability above n_max={n_max}; "
            f"use n_max >= {coherent_cutoff(alpha, tol)}"
        )
    amps = np.zeros(n_max + 1, dtype=np.complex128)
    r = abs(alpha)
    if r == 0.0:
        amps[0] = 1.0
    else:
        n = np.arange(n_max + 1)
        log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
        amps = np.exp(log_mag + 1j * n * math.atan2(alpha.imag, alpha.real))
    return FieldState(amps, "coherent", {"alpha": alpha})


def fidelity(a, b):
    """``|<a|b>|^2`` after padding both states to a common cutoff."""
    n = max(a.n_max, b.n_max)
    overlap = np.vdot(a.padded(n), b.padded(n))
    return float(min(1.0, abs(overlap) ** 2))
