"""Beam-selection histograms, PMFs and beam entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyHistogramError

PMF_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BeamHistogram:
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 1 or c.size < 1:
            raise DomainError("histogram counts must be a non-empty 1-D vector")
        if np.any(c < 0) or not np.all(np.equal(np.mod(c, 1), 0)):
            raise DomainError("histogram counts must be non-negative integers")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @classmethod
    def empty(cls, n: int) -> "BeamHistogram":
        return cls(np.zeros(n, dtype=np.int64))

    @classmethod
    def from_selections(cls, selections, n: int) -> "BeamHistogram":
        sel = np.asarray(selections, dtype=np.int64)
        if sel.size and (sel.min() < 0 or sel.max() >= n):
            raise DomainError(f"selection outside [0, {n})")
        return cls(np.bincount(sel, minlength=n))

    @property
    def n_beams(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: "BeamHistogram") -> "BeamHistogram":
        if other.n_beams != self.n_beams:
            raise DomainError(f"cannot merge histograms over {self.n_beams} and {other.n_beams} beams")
        return BeamHistogram(self.counts + other.counts)

    def __eq__(self, other):
        return isinstance(other, BeamHistogram) and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True, eq=False)
class BeamPmf:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise DomainError("pmf must be a non-empty 1-D vector")
        if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
            raise DomainError("pmf entries must lie in [0, 1]")
        if abs(np.sum(p) - 1.0) > PMF_SUM_TOL:
            raise DomainError(f"pmf sums to {np.sum(p)!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def n_beams(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class EntropyReport:
    entropy_bits: float
    max_entropy_bits: float
    relative_entropy: float
    n_beams: int
    n_samples: int


def accumulate(hist: BeamHistogram, selection: int) -> BeamHistogram:
    if int(selection) != selection or not 0 <= selection < hist.n_beams:
        raise DomainError(f"beam index {selection!r} out of range [0, {hist.n_beams})")
    counts = hist.counts.copy()
    counts[int(selection)] += 1
    return BeamHistogram(counts)


def to_pmf(hist: BeamHistogram) -> BeamPmf:
    total = hist.total
    if total == 0:
        raise EmptyHistogramError("cannot normalise an empty histogram")
    return BeamPmf(hist.counts / total)


def _as_probs(pmf) -> np.ndarray:
    return pmf.probs if isinstance(pmf, BeamPmf) else BeamPmf(pmf).probs


def entropy(pmf, base: float = 2.0) -> float:
    """Shannon entropy -sum p log p, with 0 log 0 = 0.  Bits by default."""
    p = _as_probs(pmf)
    nz = p[p > 0]
    # fsum is exactly rounded, so the result is independent of beam order
    h = -math.fsum(nz * np.log(nz)) / math.log(base)
    # "+ 0.0" turns the -0.0 of a point mass into +0.0
    return min(max(h, 0.0), math.log(p.shape[0]) / math.log(base)) + 0.0


def relative_entropy(pmf) -> float:
    p = _as_probs(pmf)
    n = p.shape[0]
    if n < 2:
        raise DomainError("relative entropy is undefined for a single beam")
    return entropy(p) / math.log2(n)


def entropy_report(hist: BeamHistogram) -> EntropyReport:
    pmf = to_pmf(hist)
    h = entropy(pmf)
    n = hist.n_beams
    hmax = float(np.log2(n))
    rel = h / hmax if n > 1 else 0.0
    return EntropyReport(h, hmax, rel, n, hist.total)


def joint_entropy(counts_2d) -> float:
    """Entropy in bits of the joint (rx, tx) selection distribution."""
    c = np.asarray(counts_2d, dtype=np.float64).ravel()
    total = c.sum()
    if total == 0:
        raise EmptyHistogramError("cannot normalise an empty histogram")
    return entropy(BeamPmf(c / total))


def arcsine_pmf_oracle(n_beams: int) -> BeamPmf:
    """Beam PMF for sin(theta) with theta uniform on [-90, 90] deg.

    Bins of width 2/N tile [-1, 1] starting at -1, so bin edges sit on
    multiples of 2/N:  P([a, b]) = (arcsin b - arcsin a) / pi.
    """
    if n_beams < 2 or n_beams % 2:
        raise DomainError(f"arcsine oracle needs an even number of beams >= 2, got {n_beams}")
    edges = np.linspace(-1.0, 1.0, n_beams + 1)
    edges[n_beams // 2] = 0.0
    p = np.diff(np.arcsin(edges)) / np.pi
    p = 0.5 * (p + p[::-1])
    return BeamPmf(p / p.sum())


def dft_arcsine_pmf(n_beams: int) -> BeamPmf:
    """Selection PMF of an N-beam DFT codebook (half-wavelength ULA) for theta uniform on [-90, 90] deg.

    Beam m wins on the circular interval psi in [2m/N - 1/N, 2m/N + 1/N)
    (psi wrapped to [-1, 1)), so bins are centred on the DFT grid and the
    endfire bin straddles psi = +-1.  Indexed by beam number.
    """
    if n_beams < 1:
        raise DomainError("n_beams must be >= 1")
    if n_beams == 1:
        return BeamPmf(np.ones(1))
    centers = 2.0 * np.arange(n_beams) / n_beams
    lo = centers - 1.0 / n_beams
    hi = centers + 1.0 / n_beams

    def mass(a, b):
        # probability that psi (arcsine law on [-1, 1]) lies in [a, b] taken mod 2
        total = 0.0
        for shift in (-2.0, 0.0, 2.0):
            aa = max(a + shift, -1.0)
            bb = min(b + shift, 1.0)
            if bb > aa:
                total += (np.arcsin(bb) - np.arcsin(aa)) / np.pi
        return total

    p = np.array([mass(a, b) for a, b in zip(lo, hi)])
    return BeamPmf(p / p.sum())
