"""Reduced states, population inversions and the Husimi Q function."""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .field import FieldDensity
from .model import PSI_TO_QUBIT, psi_offsets

GRID_POINTS = 201
GRID_HALF_WIDTH = 12.0
COVERAGE_MARGIN = 3.0


def reduce_to_qubits(rho):
    """Two-qubit state after tracing out the field.

    Basis order is (|ee>, |eg>, |ge>, |gg>).  Element ``(a(i), a(z))`` collects
    ``Omega_iz(n, v)`` over label pairs with equal photon number, i.e.
    ``v - n = offset_i - offset_z``.
    """
    offs = psi_offsets(rho.k)
    out = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        for z in range(4):
            shift = offs[i] - offs[z]
            if abs(shift) >= rho.size:
                continue
            out[PSI_TO_QUBIT[i], PSI_TO_QUBIT[z]] = np.diagonal(
                rho.omega[:, :, i, z], offset=shift).sum()
    return out


def reduce_to_qubit(rho, which):
    """Single-qubit state (basis |e>, |g>) of qubit ``which`` (1 or 2)."""
    if which not in (1, 2):
        raise ValueError(f"qubit index must be 1 or 2, got {which}")
    q = reduce_to_qubits(rho).reshape(2, 2, 2, 2)
    if which == 1:
        return np.einsum("ajbj->ab", q)
    return np.einsum("jajb->ab", q)


def inversion(rho, which):
    """Half the population difference ``(P(e) - P(g)) / 2`` of one qubit."""
    r = reduce_to_qubit(rho, which)
    return float(0.5 * (r[0, 0] - r[1, 1]).real)


def total_inversion(rho):
    """Mean of the two single-qubit inversions, within [-1/2, 1/2]."""
    q = np.real(np.diagonal(reduce_to_qubits(rho)))
    return float(0.5 * (q[0] - q[3]))


def inversions_from_qubits(q):
    """``(total, qubit 1, qubit 2)`` inversions from a two-qubit density."""
    p = np.real(np.diagonal(q))
    inv1 = 0.5 * (p[0] + p[1] - p[2] - p[3])
    inv2 = 0.5 * (p[0] + p[2] - p[1] - p[3])
    return float(0.5 * (inv1 + inv2)), float(inv1), float(inv2)


def reduce_to_field(rho):
    """Field state after tracing out both qubits."""
    dim = rho.n_photons
    out = np.zeros((dim, dim), dtype=np.complex128)
    labels = rho.labels
    present = rho.present()
    for i, off in enumerate(psi_offsets(rho.k)):
        idx = np.flatnonzero(present[:, i])
        ph = labels[idx] + off
        out[np.ix_(ph, ph)] += rho.omega[np.ix_(idx, idx)][:, :, i, i]
    return FieldDensity(out)


def grid_axes(points=GRID_POINTS, half_width=GRID_HALF_WIDTH):
    axis = np.linspace(-half_width, half_width, points)
    return axis, axis.copy()


@dataclass(frozen=True, eq=False)
class QGrid:
    """Husimi function sampled on ``values[iy, ix]`` at ``x[ix] + i y[iy]``."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    coverage_ok: bool

    def riemann_integral(self):
        dx = self.x[1] - self.x[0]
        dy = self.y[1] - self.y[0]
        return float(self.values.sum() * dx * dy)


def required_half_width(field_density, tol=1e-12):
    """Smallest grid half-width that holds the occupied Fock support.

    A Fock level ``n`` peaks at ``|zeta| = sqrt(n)``; the margin of 3 covers
    the Gaussian tail of the coherent-state overlap.
    """
    p = field_density.photon_distribution()
    occupied = np.flatnonzero(p > tol)
    n_hi = int(occupied[-1]) if occupied.size else 0
    return math.sqrt(n_hi) + COVERAGE_MARGIN


def husimi_q(field_density, x=None, y=None):
    """``Q(zeta) = <zeta|rho_F|zeta> / pi`` on the given (or default) grid.

    ``coverage_ok`` is False when the grid does not reach
    :func:`required_half_width`, in which case the sampled values are still
    correct but the integral over the grid falls short of one.
    """
    if x is None or y is None:
        x0, y0 = grid_axes()
        x = x0 if x is None else x
        y = y0 if y is None else y
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    matrix = field_density.matrix if isinstance(field_density, FieldDensity) else np.asarray(field_density)
    fd = field_density if isinstance(field_density, FieldDensity) else FieldDensity(matrix)
    values = kernels.husimi_grid(matrix, x, y)
    reach = min(abs(x[0]), abs(x[-1]), abs(y[0]), abs(y[-1]))
    return QGrid(x, y, values, bool(reach >= required_half_width(fd)))
