"""Closed-form evolution when the second qubit is far detuned.

With ``|gamma2| << |gamma1|`` the second qubit is treated as a spectator and
each block splits into two 2x2 problems: qubit 1 exchanging ``k`` photons while
qubit 2 stays excited (pair ``Psi_1, Psi_2``) or stays in the ground state
(pair ``Psi_3, Psi_4``).  For a pair whose upper state ``|e>`` holds ``p - k``
photons and lower state ``|g>`` holds ``p``, the propagator is

    U(p) = [[A_p, -exp(-2itg_p) conj(B_p)],
            [B_p,  exp(-2itg_p) conj(A_p)]]

with

    A_p = exp(-it(g_p - mu_p)) / 2 * (1 + x_p + exp(-2i mu_p t) (1 - x_p)),
    B_p = -conj(gamma1) sqrt(p!/(p-k)!) / (2 mu_p) * exp(-it(g_p - mu_p)) (1 - exp(-2i mu_p t)),
    x_p = gamma2 / (2 mu_p),  g_p = Delta + gamma2 (p + k/2),
    mu_p = sqrt(gamma2**2 / 4 + |gamma1|**2 p!/(p-k)!).

Block ``n`` uses ``U(n)`` on ``(Psi_1, Psi_2)`` and ``U(n+k)`` on
``(Psi_3, Psi_4)``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels
from .model import JointDensity, _check_time, branch_amplitudes, joint_from_weights

REGIME_RATIO = 0.5


@dataclass(frozen=True)
class DispersiveCoeffs:
    a: complex
    b: complex
    mu: float
    g: float
    n: int
    t: float
    regime_warning: bool


def _real_gamma2(params):
    g2 = complex(params.gamma2)
    if g2.imag != 0.0:
        raise ValueError(f"the dispersive formulas need a real gamma2, got {g2}")
    return g2.real


def regime_warning(params):
    """True when ``|gamma2 / gamma1|`` is too large for the spectator picture."""
    g1 = abs(params.gamma1)
    if g1 == 0.0:
        return True
    return abs(params.gamma2) / g1 > REGIME_RATIO


def _log_falling(p, k):
    """``log(p!/(p-k)!)`` via log-gamma, elementwise; ``-inf`` where ``p < k``."""
    p = np.asarray(p, dtype=float)
    ok = p >= k
    safe = np.where(ok, p, k)
    return np.where(ok, gammaln(safe + 1) - gammaln(safe - k + 1), -np.inf)


def _coefficient_arrays(params, photons, t, shifted_mu=False):
    """``A, B, mu, g`` for an integer array of pair labels ``photons >= 0``.

    ``shifted_mu=True`` evaluates the Rabi frequency with ``(p+k)!/p!`` in
    place of ``p!/(p-k)!``.  That variant is not unitary and exists only to
    reproduce tables computed with it.
    """
    k = params.k
    g2 = _real_gamma2(params)
    g1 = complex(params.gamma1)
    photons = np.asarray(photons, dtype=np.int64)
    log_c = _log_falling(photons, k)
    coupling = np.exp(0.5 * log_c)
    mu_arg = _log_falling(photons + k, k) if shifted_mu else log_c
    mu = np.sqrt(0.25 * g2 * g2 + abs(g1) ** 2 * np.exp(mu_arg))
    g = params.delta + g2 * (photons + 0.5 * k)
    lead = np.exp(-1j * t * (g - mu))
    rot = np.exp(-2j * mu * t)
    pos = mu > 0
    safe_mu = np.where(pos, mu, 1.0)
    x = np.where(pos, g2 / (2 * safe_mu), 0.0)
    a = 0.5 * lead * (1 + x + rot * (1 - x))
    b = -(np.conj(g1) * coupling / (2 * safe_mu)) * lead * (1 - rot)
    # mu = 0 only when both couplings vanish on this pair: free phase evolution
    a = np.where(pos, a, np.exp(-1j * t * g))
    b = np.where(pos, b, 0.0)
    if t == 0.0:
        a, b = np.ones_like(a), np.zeros_like(b)
    return a, b, mu, g


def dispersive_coefficients(params, n, t, shifted_mu=False):
    """``A_n(t)`` and ``B_n(t)`` for one pair label ``n >= 0``."""
    if int(n) != n or n < 0:
        raise ValueError(f"pair label must be a non-negative integer, got {n}")
    t = _check_time(t)
    a, b, mu, g = _coefficient_arrays(params, np.array([int(n)]), t, shifted_mu)
    return DispersiveCoeffs(complex(a[0]), complex(b[0]), float(mu[0]), float(g[0]),
                            int(n), t, regime_warning(params))


def pair_unitaries(params, photons, t, shifted_mu=False):
    """``(len(photons), 2, 2)`` stack of the pair propagators ``U(p)``."""
    a, b, _, g = _coefficient_arrays(params, photons, t, shifted_mu)
    ph = np.exp(-2j * t * g)
    u = np.empty((a.size, 2, 2), dtype=np.complex128)
    u[:, 0, 0] = a
    u[:, 1, 0] = b
    u[:, 0, 1] = -ph * np.conj(b)
    u[:, 1, 1] = ph * np.conj(a)
    return u


def block_unitaries(params, n_top, t, shifted_mu=False):
    """Padded 4x4 propagators for labels ``-k..n_top`` (zero on absent pairs)."""
    k = params.k
    labels = np.arange(-k, n_top + 1)
    u = np.zeros((labels.size, 4, 4), dtype=np.complex128)
    upper = pair_unitaries(params, np.maximum(labels, 0), t, shifted_mu)
    lower = pair_unitaries(params, labels + k, t, shifted_mu)
    ok = labels >= 0
    u[ok, 0:2, 0:2] = upper[ok]
    u[:, 2:4, 2:4] = lower
    # Psi_1 is absent for labels below k: its column must not feed Psi_2
    absent1 = labels < k
    u[absent1, :, 0] = 0.0
    u[absent1, 0, :] = 0.0
    return u


def _density(weights, field_state, params, t, shifted_mu):
    k = params.k
    if t == 0.0:
        rho = joint_from_weights(np.asarray(weights, dtype=float), field_state, k)
    else:
        n_top = field_state.n_max + k
        amps = branch_amplitudes(field_state, k, n_top)
        u = block_unitaries(params, n_top, t, shifted_mu)
        omega = kernels.mixture_blocks(u, amps, np.asarray(weights, dtype=float))
        # symmetrize so that Omega(n, v) = Omega(v, n)^H holds bit for bit
        omega = 0.5 * (omega + np.conj(omega.transpose(1, 0, 3, 2)))
        rho = JointDensity(omega, k, -k)
    rho.diagnostics["trace_error"] = abs(rho.trace() - sum(weights))
    rho.diagnostics["regime_warning"] = regime_warning(params)
    return rho


def dispersive_density(prep, field_state, params, t, shifted_mu=False):
    """Joint density from the closed-form pair propagators.

    The nonzero coefficients, with ``P_i(n) = w_i f(n + offset_i)`` folded in,
    are ``Omega_11, Omega_12, Omega_22`` built from ``(A_n, B_n)`` and
    ``Omega_33, Omega_34, Omega_44`` built from ``(A_{n+k}, B_{n+k})``; qubit 2
    never changes, so every coefficient linking ``{Psi_1, Psi_2}`` with
    ``{Psi_3, Psi_4}`` vanishes.  The trace defect is kept in
    ``rho.diagnostics["trace_error"]``.
    """
    t = _check_time(t)
    return _density(prep.weights, field_state, params, t, shifted_mu)


class DispersiveEngine:
    """Same interface as :class:`cavitysim.model.ExactEngine`."""

    name = "dispersive"

    def __init__(self, params, field_state, shifted_mu=False):
        _real_gamma2(params)
        self.params = params
        self.field = field_state
        self.k = params.k
        self.shifted_mu = shifted_mu
        self.regime_warning = regime_warning(params)

    def evolve(self, prep, t):
        return dispersive_density(prep, self.field, self.params, t, self.shifted_mu)

    def evolve_branches(self, t):
        t = _check_time(t)
        return [_density(np.eye(4)[i], self.field, self.params, t, self.shifted_mu)
                for i in range(4)]
