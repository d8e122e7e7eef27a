"""Small dense complex linear algebra.

Everything here targets matrices of dimension at most a few hundred: the
excitation blocks of the cavity Hamiltonian (4x4 and smaller) and the 4x4
two-qubit density matrices used for the concurrence.
"""
import cmath

import numpy as np

from . import kernels

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class NotHermitianError(ValueError):
    """Raised when a matrix fails the Hermiticity check."""


class NotPSDError(ValueError):
    """Raised when a matrix has an eigenvalue below the PSD tolerance."""


def _square(m, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    return m.astype(np.complex128, copy=False)


def hermiticity_defect(m):
    """Return ``(max |m_ij - conj(m_ji)|, (i, j))`` for a square matrix."""
    m = _square(m)
    diff = np.abs(m - m.conj().T)
    i, j = np.unravel_index(np.argmax(diff), diff.shape)
    return float(diff[i, j]), (int(i), int(j))


def is_hermitian(m, tol=HERMITIAN_TOL):
    return hermiticity_defect(m)[0] < tol


def check_hermitian(m, tol=HERMITIAN_TOL, name="matrix"):
    m = _square(m, name)
    defect, (i, j) = hermiticity_defect(m)
    if not defect < tol:
        raise NotHermitianError(
            f"{name} is not Hermitian: |M[{i},{j}] - conj(M[{j},{i}])| = {defect:.3e} "
            f"exceeds {tol:.1e} (M[{i},{j}] = {m[i, j]!r}, M[{j},{i}] = {m[j, i]!r})"
        )
    return m


def hermitian_eigen(m, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : (d, d) array_like
        Hermitian matrix.  Entries violating ``M = M^H`` by more than `tol`
        raise :class:`NotHermitianError` naming the offending pair.
    tol : float
        Hermiticity tolerance.

    Returns
    -------
    w : (d,) ndarray
        Real eigenvalues in ascending order.
    v : (d, d) ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    m = check_hermitian(m, tol)
    w, v, _ = kernels.jacobi_batch(m[None], JACOBI_TOL, JACOBI_MAX_SWEEPS)
    return w[0], v[0]


def hermitian_eigen_batch(mats, tol=HERMITIAN_TOL):
    """Vectorized :func:`hermitian_eigen` over a ``(B, d, d)`` stack."""
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"expected a (B, d, d) stack, got shape {mats.shape}")
    diff = np.abs(mats - np.conj(np.swapaxes(mats, 1, 2)))
    if diff.size and not diff.max() < tol:
        b, i, j = np.unravel_index(np.argmax(diff), diff.shape)
        raise NotHermitianError(
            f"matrix {b} of the batch is not Hermitian at entry pair ({i},{j}): "
            f"defect {diff[b, i, j]:.3e}"
        )
    w, v, _ = kernels.jacobi_batch(mats, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    return w, v


def psd_sqrt(m, tol=1e-12, cutoff=0.0):
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises :class:`NotPSDError`.  Eigenvalues at or below ``cutoff`` (relative
    to the largest) are also treated as zero, which keeps roundoff in a
    rank-deficient input from leaking into the root as ``sqrt(eps)`` noise.
    """
    w, v = hermitian_eigen(m)
    if w[0] < -tol:
        raise NotPSDError(f"matrix is not PSD: smallest eigenvalue {w[0]:.3e} < -{tol:.1e}")
    floor = cutoff * max(w[-1], 0.0)
    root = np.sqrt(np.where(w > floor, w, 0.0))
    s = (v * root) @ v.conj().T
    return 0.5 * (s + s.conj().T)


# ---------------------------------------------------------------------------
# general 4x4 eigenvalues (characteristic quartic)
# ---------------------------------------------------------------------------

def charpoly_4x4(m):
    """Monic characteristic polynomial coefficients ``[1, c3, c2, c1, c0]``.

    Faddeev-LeVerrier recursion; exact in exact arithmetic for any 4x4 matrix.
    """
    m = _square(m)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    coeffs = [1.0 + 0j]
    mk = np.zeros((4, 4), dtype=np.complex128)
    eye = np.eye(4)
    for k in range(1, 5):
        mk = m @ (mk + coeffs[-1] * eye)
        coeffs.append(-np.trace(mk) / k)
    return np.array(coeffs)


def _cubic_roots(a, b, c):
    """Roots of ``x^3 + a x^2 + b x + c`` (complex coefficients)."""
    d0 = a * a - 3 * b
    d1 = 2 * a ** 3 - 9 * a * b + 27 * c
    disc = cmath.sqrt(d1 * d1 - 4 * d0 ** 3)
    big = d1 + disc if abs(d1 + disc) >= abs(d1 - disc) else d1 - disc
    if abs(big) == 0.0:
        return [-a / 3] * 3
    cc = (big / 2) ** (1 / 3)
    xi = complex(-0.5, 3 ** 0.5 / 2)
    roots = []
    for j in range(3):
        ck = cc * xi ** j
        roots.append(-(a + ck + d0 / ck) / 3)
    return roots


def _quartic_roots(c3, c2, c1, c0):
    """Ferrari solution of ``x^4 + c3 x^3 + c2 x^2 + c1 x + c0``."""
    shift = c3 / 4
    p = c2 - 3 * c3 * c3 / 8
    q = c1 - c3 * c2 / 2 + c3 ** 3 / 8
    r = c0 - c3 * c1 / 4 + c3 * c3 * c2 / 16 - 3 * c3 ** 4 / 256
    scale = max(abs(p), abs(q), abs(r), 1e-300)
    if abs(q) <= 1e-14 * scale:
        disc = cmath.sqrt(p * p - 4 * r)
        ys = []
        for z in ((-p + disc) / 2, (-p - disc) / 2):
            s = cmath.sqrt(z)
            ys += [s, -s]
    else:
        # resolvent 8m^3 + 8pm^2 + (2p^2 - 8r)m - q^2 = 0; take the largest root
        ms = _cubic_roots(p, (p * p - 4 * r) / 4, -q * q / 8)
        mm = max(ms, key=abs)
        s2m = cmath.sqrt(2 * mm)
        ys = []
        for sgn in (1, -1):
            inner = cmath.sqrt(-(2 * p + 2 * mm + sgn * 2 * q / s2m))
            ys += [(sgn * s2m + inner) / 2, (sgn * s2m - inner) / 2]
    return [y - shift for y in ys]


def _polish(root, coeffs, steps=3):
    """Newton steps on the quartic, kept only while the residual shrinks."""
    poly = np.poly1d(coeffs)
    dpoly = poly.deriv()
    best, best_res = root, abs(poly(root))
    x = root
    for _ in range(steps):
        d = dpoly(x)
        if d == 0:
            break
        x = x - poly(x) / d
        res = abs(poly(x))
        if res < best_res:
            best, best_res = x, res
        else:
            break
    return complex(best)


def eigvals_general_4x4(m):
    """Eigenvalues of an arbitrary complex 4x4 matrix.

    Roots of the characteristic quartic by Ferrari's closed form, each polished
    by guarded Newton iterations.  No companion matrix or LAPACK call is used,
    so this stays independent of :func:`hermitian_eigen`.
    """
    coeffs = charpoly_4x4(m)
    roots = _quartic_roots(*coeffs[1:])
    return np.array([_polish(r, coeffs) for r in roots])
