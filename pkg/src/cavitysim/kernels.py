"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import from the ``CAVITYSIM_NUMBA`` environment
variable (``0``/``false``/``no``/``off`` selects numpy).  Both backends expose
the same four kernels:

``jacobi_batch(mats, tol, max_sweeps)``
    Cyclic complex Jacobi diagonalization of a stack of Hermitian matrices.
``conjugate_blocks(u, omega)``
    ``out[n, v] = u[n] @ omega[n, v] @ u[v]^H`` over a grid of block pairs.
``husimi_grid(rho, x, y)``
    ``(1/pi) <z|rho|z>`` for every ``z = x + iy`` on a rectangular grid.
``mixture_blocks(u, amps, weights)``
    Block form of ``sum_j w_j U|phi_j><phi_j|U^H`` when every initial branch
    ``j`` is the single state ``amps[:, j]`` spread over the block labels.

:func:`set_backend` switches at runtime; the benchmark and the test suite use
it to run both paths in one process.
"""
import math
import os

import numpy as np

_FALSY = {"0", "false", "no", "off"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency
    numba = None

NUMBA_AVAILABLE = numba is not None


def _env_wants_numba():
    return os.environ.get("CAVITYSIM_NUMBA", "1").strip().lower() not in _FALSY


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _jacobi_numpy(mats, tol, max_sweeps):
    a = np.array(mats, dtype=np.complex128, copy=True)
    nb, d, _ = a.shape
    v = np.broadcast_to(np.eye(d, dtype=np.complex128), (nb, d, d)).copy()
    fro = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    sweeps = np.zeros(nb, dtype=np.int64)
    offmask = ~np.eye(d, dtype=bool)
    active = np.ones(nb, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        active = off > tol * fro
        if not active.any():
            break
        sweeps += active
        idx = np.flatnonzero(active)
        sub = a[idx]
        vs = v[idx]
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = sub[:, p, q].copy()
                r = np.abs(apq)
                nz = r > 0.0
                safe_r = np.where(nz, r, 1.0)
                e = np.where(nz, apq / safe_r, 1.0)
                app = sub[:, p, p].real.copy()
                aqq = sub[:, q, q].real.copy()
                tau = (aqq - app) / (2.0 * safe_r)
                sgn = np.where(tau >= 0.0, 1.0, -1.0)
                big = np.abs(tau) > 1e150
                tau_c = np.where(big, 1.0, tau)
                t = np.where(big, 0.5 / np.where(big, tau, 1.0),
                             sgn / (np.abs(tau_c) + np.sqrt(1.0 + tau_c * tau_c)))
                t = np.where(nz, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ec = np.conj(e)
                cp = sub[:, :, p].copy()
                cq = sub[:, :, q]
                sub[:, :, p] = c[:, None] * cp - (s * ec)[:, None] * cq
                sub[:, :, q] = s[:, None] * cp + (c * ec)[:, None] * cq
                rp = sub[:, p, :].copy()
                rq = sub[:, q, :]
                sub[:, p, :] = c[:, None] * rp - (s * e)[:, None] * rq
                sub[:, q, :] = s[:, None] * rp + (c * e)[:, None] * rq
                sub[:, p, q] = np.where(nz, 0.0, sub[:, p, q])
                sub[:, q, p] = np.where(nz, 0.0, sub[:, q, p])
                sub[:, p, p] = np.where(nz, app - t * r, sub[:, p, p])
                sub[:, q, q] = np.where(nz, aqq + t * r, sub[:, q, q])
                vp = vs[:, :, p].copy()
                vq = vs[:, :, q]
                vs[:, :, p] = c[:, None] * vp - (s * ec)[:, None] * vq
                vs[:, :, q] = s[:, None] * vp + (c * ec)[:, None] * vq
        a[idx] = sub
        v[idx] = vs
    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v, sweeps


def _conjugate_blocks_numpy(u, omega):
    uh = np.conj(np.swapaxes(u, 1, 2))
    return np.matmul(np.matmul(u[:, None], omega), uh[None, :])


def _mixture_blocks_numpy(u, amps, weights):
    out = np.zeros((u.shape[0], u.shape[0], 4, 4), dtype=np.complex128)
    for j in range(weights.size):
        if weights[j] != 0.0:
            phi = u[:, :, j] * amps[:, j][:, None]
            out += weights[j] * (phi[:, None, :, None] * np.conj(phi)[None, :, None, :])
    return out


def _husimi_numpy(rho, x, y):
    z = (x[None, :] + 1j * y[:, None]).ravel()
    dim = rho.shape[0]
    c = np.empty((z.size, dim), dtype=np.complex128)
    c[:, 0] = np.exp(-0.5 * np.abs(z) ** 2)
    for n in range(1, dim):
        c[:, n] = c[:, n - 1] * z / math.sqrt(n)
    # <z|n> = conj(c_n)
    q = np.real(np.sum(np.conj(c) * (c @ rho.T), axis=1)) / math.pi
    return q.reshape(y.size, x.size)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @numba.njit(cache=True, nogil=True)
    def _jacobi_numba(mats, tol, max_sweeps):
        nb, d, _ = mats.shape
        w = np.empty((nb, d))
        vout = np.empty((nb, d, d), dtype=np.complex128)
        sweeps = np.zeros(nb, dtype=np.int64)
        for b in range(nb):
            a = mats[b].copy()
            v = np.zeros((d, d), dtype=np.complex128)
            fro = 0.0
            for i in range(d):
                v[i, i] = 1.0
                for j in range(d):
                    fro += a[i, j].real ** 2 + a[i, j].imag ** 2
            fro = math.sqrt(fro)
            for sweep in range(max_sweeps):
                off = 0.0
                for i in range(d):
                    for j in range(d):
                        if i != j:
                            off += a[i, j].real ** 2 + a[i, j].imag ** 2
                if math.sqrt(off) <= tol * fro:
                    break
                sweeps[b] += 1
                for p in range(d - 1):
                    for q in range(p + 1, d):
                        apq = a[p, q]
                        r = abs(apq)
                        if r == 0.0:
                            continue
                        e = apq / r
                        ec = e.conjugate()
                        app = a[p, p].real
                        aqq = a[q, q].real
                        tau = (aqq - app) / (2.0 * r)
                        if abs(tau) > 1e150:
                            t = 0.5 / tau
                        elif tau >= 0.0:
                            t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                        else:
                            t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                        c = 1.0 / math.sqrt(1.0 + t * t)
                        s = t * c
                        for i in range(d):
                            aip = a[i, p]
                            aiq = a[i, q]
                            a[i, p] = c * aip - s * ec * aiq
                            a[i, q] = s * aip + c * ec * aiq
                        for j in range(d):
                            apj = a[p, j]
                            aqj = a[q, j]
                            a[p, j] = c * apj - s * e * aqj
                            a[q, j] = s * apj + c * e * aqj
                        a[p, q] = 0.0
                        a[q, p] = 0.0
                        a[p, p] = app - t * r
                        a[q, q] = aqq + t * r
                        for i in range(d):
                            vip = v[i, p]
                            viq = v[i, q]
                            v[i, p] = c * vip - s * ec * viq
                            v[i, q] = s * vip + c * ec * viq
            diag = np.empty(d)
            for i in range(d):
                diag[i] = a[i, i].real
            order = np.argsort(diag, kind="mergesort")
            for i in range(d):
                w[b, i] = diag[order[i]]
                for j in range(d):
                    vout[b, j, i] = v[j, order[i]]
        return w, vout, sweeps

    @numba.njit(cache=True, nogil=True)
    def _conjugate_blocks_numba(u, omega):
        nl = u.shape[0]
        d = u.shape[1]
        out = np.zeros_like(omega)
        tmp = np.empty((d, d), dtype=np.complex128)
        for n in range(nl):
            for v in range(nl):
                blk = omega[n, v]
                nonzero = False
                for i in range(d):
                    for j in range(d):
                        if blk[i, j] != 0.0:
                            nonzero = True
                if not nonzero:
                    continue
                for i in range(d):
                    for j in range(d):
                        acc = 0.0j
                        for l in range(d):
                            acc += u[n, i, l] * blk[l, j]
                        tmp[i, j] = acc
                for i in range(d):
                    for j in range(d):
                        acc = 0.0j
                        for l in range(d):
                            acc += tmp[i, l] * u[v, j, l].conjugate()
                        out[n, v, i, j] = acc
        return out

    @numba.njit(cache=True, nogil=True)
    def _mixture_blocks_numba(u, amps, weights):
        nl, d, _ = u.shape
        phi = np.zeros((weights.size, nl, d), dtype=np.complex128)
        for j in range(weights.size):
            for n in range(nl):
                for i in range(d):
                    phi[j, n, i] = u[n, i, j] * amps[n, j]
        out = np.zeros((nl, nl, d, d), dtype=np.complex128)
        for j in range(weights.size):
            w = weights[j]
            if w == 0.0:
                continue
            for n in range(nl):
                for v in range(nl):
                    for i in range(d):
                        a = w * phi[j, n, i]
                        if a == 0.0:
                            continue
                        for z in range(d):
                            out[n, v, i, z] += a * phi[j, v, z].conjugate()
        return out

    @numba.njit(cache=True, nogil=True)
    def _husimi_numba(rho, x, y):
        # rho is Hermitian: <z|rho|z> = sum_n rho_nn |c_n|^2 + 2 Re sum_{n<l} conj(c_n) rho_nl c_l.
        # Real and imaginary parts are kept in separate arrays so the inner
        # loop vectorizes.
        dim = rho.shape[0]
        q = np.empty((y.size, x.size))
        rr = np.ascontiguousarray(rho.real)
        ri = np.ascontiguousarray(rho.imag)
        inv_sqrt = np.zeros(dim)
        for n in range(1, dim):
            inv_sqrt[n] = 1.0 / math.sqrt(n)
        cr = np.empty(dim)
        ci = np.empty(dim)
        for iy in range(y.size):
            for ix in range(x.size):
                zr = x[ix]
                zi = y[iy]
                cr[0] = math.exp(-0.5 * (zr * zr + zi * zi))
                ci[0] = 0.0
                for n in range(1, dim):
                    cr[n] = (cr[n - 1] * zr - ci[n - 1] * zi) * inv_sqrt[n]
                    ci[n] = (cr[n - 1] * zi + ci[n - 1] * zr) * inv_sqrt[n]
                acc = 0.0
                for n in range(dim):
                    # real part of conj(c_n) * sum_{l>n} rho_nl c_l
                    sr = 0.0
                    si = 0.0
                    for l in range(n + 1, dim):
                        sr += rr[n, l] * cr[l] - ri[n, l] * ci[l]
                        si += rr[n, l] * ci[l] + ri[n, l] * cr[l]
                    acc += rr[n, n] * (cr[n] * cr[n] + ci[n] * ci[n]) + 2.0 * (cr[n] * sr + ci[n] * si)
                q[iy, ix] = acc / math.pi
        return q


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_IMPLS = {
    "numpy": (_jacobi_numpy, _conjugate_blocks_numpy, _husimi_numpy, _mixture_blocks_numpy),
}
if NUMBA_AVAILABLE:
    # The Q grid is one dense matrix product per grid point; numpy hands it to
    # BLAS, which outruns the compiled loop (see benchmarks/bench_kernels.py),
    # so both backends share the numpy version.
    _IMPLS["numba"] = (_jacobi_numba, _conjugate_blocks_numba, _husimi_numpy, _mixture_blocks_numba)

BACKEND = "numba" if (NUMBA_AVAILABLE and _env_wants_numba()) else "numpy"


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` kernels; returns the previous name."""
    global BACKEND
    if name not in _IMPLS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(_IMPLS)}")
    previous, BACKEND = BACKEND, name
    return previous


def jacobi_batch(mats, tol=1e-14, max_sweeps=100):
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    return _IMPLS[BACKEND][0](mats, float(tol), int(max_sweeps))


def conjugate_blocks(u, omega):
    u = np.ascontiguousarray(u, dtype=np.complex128)
    omega = np.ascontiguousarray(omega, dtype=np.complex128)
    return _IMPLS[BACKEND][1](u, omega)


def husimi_grid(rho, x, y):
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return _IMPLS[BACKEND][2](rho, x, y)


def mixture_blocks(u, amps, weights):
    u = np.ascontiguousarray(u, dtype=np.complex128)
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    return _IMPLS[BACKEND][3](u, amps, weights)
