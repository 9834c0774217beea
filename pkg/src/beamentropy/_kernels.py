"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The active backend is chosen once at import time.  Set
``BEAMENTROPY_DISABLE_NUMBA=1`` to force the numpy path (useful for debugging
and for platforms without numba).  Both implementations stay importable as
:data:`numba_impl` and :data:`numpy_impl` so tests and benchmarks can compare
them side by side.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

TWO_PI = 2.0 * np.pi

JACOBI_MAX_SWEEPS = 60


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


# ---------------------------------------------------------------------------
# numpy reference path
# ---------------------------------------------------------------------------


def _np_synthesize(gains, aod_deg, aoa_deg, delays_s, freq_hz, n_tx, d_tx, n_rx, d_rx):
    k_tx = np.arange(n_tx)
    k_rx = np.arange(n_rx)
    out = np.zeros((n_rx, n_tx), dtype=np.complex128)
    for l in range(gains.shape[0]):
        coef = gains[l] * np.exp(-1j * TWO_PI * freq_hz * delays_s[l])
        a_rx = np.exp(1j * TWO_PI * d_rx * k_rx * np.sin(np.deg2rad(aoa_deg[l])))
        a_tx = np.exp(1j * TWO_PI * d_tx * k_tx * np.sin(np.deg2rad(aod_deg[l])))
        out += coef * np.outer(a_rx, a_tx.conj())
    return out


def _np_gain_grid(h, w_tx, w_rx):
    return np.abs(w_rx.conj().T @ h @ w_tx)


def _np_argmax_first(values):
    # np.argmax on the flattened row-major array already returns the lowest
    # row, then lowest column among ties.
    flat = int(np.argmax(values))
    return flat // values.shape[1], flat % values.shape[1]


def _np_jacobi_eigvalsh(a, rel_tol):
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real]), 0
    tol = rel_tol * np.sqrt(np.sum(a.real**2 + a.imag**2))
    sweeps = 0
    while sweeps < JACOBI_MAX_SWEEPS:
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b <= tol:
                    continue
                rotated = True
                u = apq / b
                tau = (a[q, q].real - a[p, p].real) / (2.0 * b)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # V = diag(1, conj(u)) @ [[c, s], [-s, c]] on the (p, q) plane
                vpp, vpq = c, s
                vqp, vqq = -s * np.conj(u), c * np.conj(u)
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = col_p * vpp + col_q * vqp
                a[:, q] = col_p * vpq + col_q * vqq
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = np.conj(vpp) * row_p + np.conj(vqp) * row_q
                a[q, :] = np.conj(vpq) * row_p + np.conj(vqq) * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
        sweeps += 1
        if not rotated:
            break
    return np.sort(np.diag(a).real)[::-1], sweeps


numpy_impl = SimpleNamespace(
    name="numpy",
    synthesize=_np_synthesize,
    gain_grid=_np_gain_grid,
    argmax_first=_np_argmax_first,
    jacobi_eigvalsh=_np_jacobi_eigvalsh,
)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------


def _build_numba():
    import numba as nb

    kw = {"cache": True, "nogil": True}

    @nb.njit(**kw)
    def synthesize(gains, aod_deg, aoa_deg, delays_s, freq_hz, n_tx, d_tx, n_rx, d_rx):
        out = np.zeros((n_rx, n_tx), dtype=np.complex128)
        a_tx = np.empty(n_tx, dtype=np.complex128)
        a_rx = np.empty(n_rx, dtype=np.complex128)
        for l in range(gains.shape[0]):
            coef = gains[l] * np.exp(-1j * TWO_PI * freq_hz * delays_s[l])
            s_tx = np.sin(np.deg2rad(aod_deg[l]))
            s_rx = np.sin(np.deg2rad(aoa_deg[l]))
            for k in range(n_tx):
                a_tx[k] = np.exp(-1j * TWO_PI * d_tx * k * s_tx)
            for k in range(n_rx):
                a_rx[k] = coef * np.exp(1j * TWO_PI * d_rx * k * s_rx)
            for i in range(n_rx):
                for j in range(n_tx):
                    out[i, j] += a_rx[i] * a_tx[j]
        return out

    @nb.njit(**kw)
    def gain_grid(h, w_tx, w_rx):
        # np.dot lowers to BLAS zgemm; hand-written complex loops are ~5x slower
        w_rx_h = np.ascontiguousarray(np.conj(w_rx).T)
        return np.abs(np.dot(w_rx_h, np.dot(h, w_tx)))

    @nb.njit(**kw)
    def argmax_first(values):
        best = -1.0
        bi = 0
        bj = 0
        for i in range(values.shape[0]):
            for j in range(values.shape[1]):
                if values[i, j] > best:
                    best = values[i, j]
                    bi = i
                    bj = j
        return bi, bj

    @nb.njit(**kw)
    def jacobi_eigvalsh(a_in, rel_tol):
        a = a_in.copy()
        n = a.shape[0]
        if n == 1:
            return np.array([a[0, 0].real]), 0
        fro = 0.0
        for i in range(n):
            for j in range(n):
                fro += a[i, j].real ** 2 + a[i, j].imag ** 2
        tol = rel_tol * np.sqrt(fro)
        sweeps = 0
        while sweeps < JACOBI_MAX_SWEEPS:
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    b = np.abs(apq)
                    if b <= tol:
                        continue
                    rotated = True
                    u = apq / b
                    tau = (a[q, q].real - a[p, p].real) / (2.0 * b)
                    sgn = 1.0 if tau >= 0.0 else -1.0
                    t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    vqp = -s * np.conj(u)
                    vqq = c * np.conj(u)
                    for i in range(n):
                        xp = a[i, p]
                        xq = a[i, q]
                        a[i, p] = xp * c + xq * vqp
                        a[i, q] = xp * s + xq * vqq
                    for j in range(n):
                        xp = a[p, j]
                        xq = a[q, j]
                        a[p, j] = c * xp + np.conj(vqp) * xq
                        a[q, j] = s * xp + np.conj(vqq) * xq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
            sweeps += 1
            if not rotated:
                break
        lam = np.empty(n, dtype=np.float64)
        for i in range(n):
            lam[i] = a[i, i].real
        return np.sort(lam)[::-1], sweeps

    return SimpleNamespace(
        name="numba",
        synthesize=synthesize,
        gain_grid=gain_grid,
        argmax_first=argmax_first,
        jacobi_eigvalsh=jacobi_eigvalsh,
    )


numba_impl = None
if not _env_flag("BEAMENTROPY_DISABLE_NUMBA"):
    try:
        numba_impl = _build_numba()
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba_impl = None

active = numba_impl if numba_impl is not None else numpy_impl
BACKEND = active.name


def synthesize(gains, aod_deg, aoa_deg, delays_s, freq_hz, n_tx, d_tx, n_rx, d_rx):
    return active.synthesize(
        np.ascontiguousarray(gains, dtype=np.complex128),
        np.ascontiguousarray(aod_deg, dtype=np.float64),
        np.ascontiguousarray(aoa_deg, dtype=np.float64),
        np.ascontiguousarray(delays_s, dtype=np.float64),
        float(freq_hz),
        int(n_tx),
        float(d_tx),
        int(n_rx),
        float(d_rx),
    )


def gain_grid(h, w_tx, w_rx):
    return active.gain_grid(
        np.ascontiguousarray(h, dtype=np.complex128),
        np.ascontiguousarray(w_tx, dtype=np.complex128),
        np.ascontiguousarray(w_rx, dtype=np.complex128),
    )


def argmax_first(values):
    i, j = active.argmax_first(np.ascontiguousarray(values, dtype=np.float64))
    return int(i), int(j)


def jacobi_eigvalsh(a, rel_tol=1e-12):
    """Eigenvalues of a Hermitian matrix, descending, by cyclic Jacobi."""
    lam, _ = active.jacobi_eigvalsh(np.ascontiguousarray(a, dtype=np.complex128), float(rel_tol))
    return lam
