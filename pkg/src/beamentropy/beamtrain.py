"""Exhaustive joint Tx/Rx beam training over DFT codebooks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .array import Codebook
from .beamstats import BeamPmf
from .channel import ChannelMatrix
from .errors import DomainError


@dataclass(frozen=True, eq=False)
class GainMatrix:
    """values[i, j] = |w_rx_i^H H f_tx_j|, shape (Nr, Nt)."""

    values: np.ndarray

    def __eq__(self, other):
        return isinstance(other, GainMatrix) and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class BeamSelection:
    tx_beam: int
    rx_beam: int
    gain: float
    # set for all-zero gain matrices; such selections are not counted
    degenerate: bool = False


def sweep(h: ChannelMatrix | np.ndarray, tx_cb: Codebook, rx_cb: Codebook) -> GainMatrix:
    entries = h.entries if isinstance(h, ChannelMatrix) else np.asarray(h, dtype=np.complex128)
    nr, nt = entries.shape
    if tx_cb.weights.shape[0] != nt or rx_cb.weights.shape[0] != nr:
        raise DomainError(
            f"codebooks ({rx_cb.weights.shape[0]} rx, {tx_cb.weights.shape[0]} tx) "
            f"do not match channel shape {entries.shape}"
        )
    return GainMatrix(_kernels.gain_grid(entries, tx_cb.weights, rx_cb.weights))


def select_best(gm: GainMatrix) -> BeamSelection:
    """Argmax of the gain grid; ties go to the lowest rx beam, then lowest tx beam."""
    v = gm.values
    if v.size == 0:
        raise DomainError("empty gain matrix")
    i, j = _kernels.argmax_first(v)
    g = float(v[i, j])
    return BeamSelection(tx_beam=j, rx_beam=i, gain=g, degenerate=g == 0.0)


def train(h, tx_cb: Codebook, rx_cb: Codebook) -> BeamSelection:
    return select_best(sweep(h, tx_cb, rx_cb))


def expected_probe_count(pmf) -> float:
    """Mean number of beam tests when beams are probed in descending-probability order."""
    p = pmf.probs if isinstance(pmf, BeamPmf) else BeamPmf(pmf).probs
    ranked = np.sort(p)[::-1]
    return float(np.dot(np.arange(1, ranked.size + 1), ranked))
