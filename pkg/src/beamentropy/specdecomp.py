"""Singular-value diagnostics: spectrum, condition number in dB, effective rank.

Singular values come from the Hermitian eigenvalues of the smaller Gram
matrix (H H^H when Nr <= Nt), found with a cyclic Jacobi sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import ChannelMatrix
from .errors import DomainError

# sigma_min / sigma_1 floor; condition numbers saturate at 180 dB
CONDITION_FLOOR = 1e-9
DEFAULT_RANK_THRESHOLD = 1e-2
JACOBI_REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SvdReport:
    singular_values: np.ndarray
    condition_number_db: float
    effective_rank: int
    threshold: float
    degenerate: bool = False

    @property
    def sigma_ratio(self) -> float:
        """sigma_2 / sigma_1 (0 for rank-deficient or 1-column matrices)."""
        s = self.singular_values
        if s.size < 2 or s[0] == 0:
            return 0.0
        return float(s[1] / s[0])


def _entries(h) -> np.ndarray:
    a = h.entries if isinstance(h, ChannelMatrix) else np.asarray(h, dtype=np.complex128)
    if a.ndim != 2:
        raise DomainError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return a


def singular_values(h) -> np.ndarray:
    a = _entries(h)
    nr, nt = a.shape
    gram = a @ a.conj().T if nr <= nt else a.conj().T @ a
    lam = _kernels.jacobi_eigvalsh(gram, JACOBI_REL_TOL)
    return np.sqrt(np.clip(lam, 0.0, None))


def analyze(h, threshold: float = DEFAULT_RANK_THRESHOLD) -> SvdReport:
    if not 0 < threshold < 1:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}")
    s = singular_values(h)
    s1 = s[0]
    if s1 == 0:
        return SvdReport(s, float("nan"), 0, threshold, degenerate=True)
    smin = max(s[-1], s1 * CONDITION_FLOOR)
    cond_db = 20.0 * np.log10(s1 / smin)
    rank = int(np.count_nonzero(s >= threshold * s1))
    return SvdReport(s, float(cond_db), rank, threshold)
