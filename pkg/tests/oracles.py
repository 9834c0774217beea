"""Independent reference computations used by the tests.

Nothing here imports the package under test.
"""

import math

import numpy as np


def classic_jacobi_real(a, tol=1e-14, max_rot=None):
    """Eigenvalues of a real symmetric matrix by classical (max-pivot) Jacobi."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if max_rot is None:
        max_rot = 50 * n * n
    scale = np.sqrt(np.sum(a * a))
    for _ in range(max_rot):
        off = np.abs(np.triu(a, 1))
        k, l = np.unravel_index(np.argmax(off), off.shape)
        if off[k, l] <= tol * scale:
            break
        diff = a[l, l] - a[k, k]
        phi = diff / (2.0 * a[k, l])
        t = 1.0 / (abs(phi) + math.sqrt(phi * phi + 1.0))
        if phi < 0:
            t = -t
        c = 1.0 / math.sqrt(t * t + 1.0)
        s = t * c
        # a <- R^T a R with R the (k, l) plane rotation
        ak, al = a[:, k].copy(), a[:, l].copy()
        a[:, k], a[:, l] = c * ak - s * al, s * ak + c * al
        ak, al = a[k, :].copy(), a[l, :].copy()
        a[k, :], a[l, :] = c * ak - s * al, s * ak + c * al
    return np.sort(np.diag(a))[::-1]


def brute_singular_values(h):
    """sigma of complex H from the real 2n x 2n embedding of H^H H.

    Every eigenvalue of the embedding appears twice; keep one of each pair.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape[0] < h.shape[1]:
        h = h.conj().T  # same nonzero spectrum, smaller Gram matrix
    g = h.conj().T @ h
    emb = np.block([[g.real, -g.imag], [g.imag, g.real]])
    lam = classic_jacobi_real(emb)[::2]
    k = min(h.shape)
    return np.sqrt(np.clip(lam[:k], 0.0, None))


def ula_response(n, spacing, angle_deg):
    """Element-by-element ULA phase formula."""
    s = math.sin(math.radians(angle_deg))
    return np.array([complex(math.cos(2 * math.pi * spacing * k * s), math.sin(2 * math.pi * spacing * k * s))
                     for k in range(n)])


def dft_matrix(n):
    return np.array([[np.exp(2j * np.pi * k * m / n) / np.sqrt(n) for m in range(n)] for k in range(n)])


def brute_best_pair(h, w_tx, w_rx):
    """Double loop over every (rx, tx) beam pair; strict '>' keeps the first maximum."""
    best, bi, bj = -1.0, 0, 0
    for i in range(w_rx.shape[1]):
        left = w_rx[:, i].conj() @ h
        for j in range(w_tx.shape[1]):
            g = abs(left @ w_tx[:, j])
            if g > best:
                best, bi, bj = g, i, j
    return bi, bj, best


def plugin_entropy_bits(counts):
    c = np.asarray(counts, dtype=float)
    p = c[c > 0] / c.sum()
    return float(-np.sum(p * np.log2(p)))


def ks_uniform(samples, lo, hi):
    """Kolmogorov-Smirnov statistic of samples against U(lo, hi)."""
    x = np.sort((np.asarray(samples) - lo) / (hi - lo))
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))
