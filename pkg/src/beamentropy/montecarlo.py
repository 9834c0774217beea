"""Monte Carlo harness: realizations -> beam training -> beam statistics.

Every run ``r`` draws from its own counter-based substream (Philox keyed by
a SeedSequence hash of ``(master_seed, r)``), so results depend only on the
run indices covered, never on scheduling, thread count or sharding.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .array import ArrayGeometry, Codebook, dft_codebook
from .beamstats import BeamHistogram, EntropyReport, entropy_report, joint_entropy, to_pmf
from .beamtrain import expected_probe_count, select_best, sweep
from .channel import (
    ChannelMatrix,
    ChannelRealization,
    ScenarioConfig,
    apply_tx_power,
    draw_realization,
    realization_to_matrix,
    subcarrier_offsets,
)
from .errors import ConfigError, DomainError
from .specdecomp import DEFAULT_RANK_THRESHOLD, analyze, singular_values

DEFAULT_TRACE_STRIDE = 500
CHUNK_RUNS = 250

RECORD_DTYPE = np.dtype(
    [
        ("run", np.int64),
        ("tx_beam", np.int32),
        ("rx_beam", np.int32),
        ("degenerate", np.bool_),
        ("eff_rank", np.int32),
        ("sigma_ratio", np.float64),
        ("condition_db", np.float64),
        ("violations", np.int32),
    ]
)


@dataclass(frozen=True)
class SubcarrierCheck:
    bandwidth_hz: float
    count: int

    def __post_init__(self):
        if self.count < 1 or self.bandwidth_hz < 0:
            raise ConfigError("subcarrier check needs count >= 1 and bandwidth_hz >= 0")


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: ScenarioConfig | None
    tx_geom: ArrayGeometry
    rx_geom: ArrayGeometry
    n_runs: int
    master_seed: int = 0
    tx_power_deltas_db: tuple[float, ...] = (0.0,)
    subcarrier_check: SubcarrierCheck | None = None
    entropy_trace_stride: int = DEFAULT_TRACE_STRIDE
    rank_threshold: float = DEFAULT_RANK_THRESHOLD
    # spectra of the first runs kept for reports
    sv_sample_runs: int = 8

    def __post_init__(self):
        if int(self.n_runs) != self.n_runs or self.n_runs < 1:
            raise ConfigError(f"n_runs must be a positive integer, got {self.n_runs!r}", "runs")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.master_seed!r}", "seed")
        if int(self.entropy_trace_stride) < 1:
            raise ConfigError("entropy_trace_stride must be >= 1", "trace_stride")
        if not 0 < self.rank_threshold < 1:
            raise ConfigError("rank_threshold must lie in (0, 1)", "rank_threshold")
        object.__setattr__(self, "tx_power_deltas_db", tuple(float(d) for d in self.tx_power_deltas_db))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "n_runs", int(self.n_runs))


def substream(master_seed: int, run_index: int) -> np.random.Generator:
    """Independent generator for run ``run_index``; pure function of its arguments."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(run_index),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(eq=False)
class ExperimentResult:
    spec: ExperimentSpec
    records: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=RECORD_DTYPE))
    sv_samples: dict[int, np.ndarray] = field(default_factory=dict)

    @classmethod
    def empty(cls, spec: ExperimentSpec) -> "ExperimentResult":
        return cls(spec)

    @property
    def n_tx(self) -> int:
        return self.spec.tx_geom.num_elements

    @property
    def n_rx(self) -> int:
        return self.spec.rx_geom.num_elements

    @property
    def n_covered(self) -> int:
        return int(self.records.shape[0])

    @property
    def _valid(self) -> np.ndarray:
        return self.records[~self.records["degenerate"]]

    @property
    def degenerate_count(self) -> int:
        return int(np.count_nonzero(self.records["degenerate"]))

    @property
    def tx_hist(self) -> BeamHistogram:
        return BeamHistogram.from_selections(self._valid["tx_beam"], self.n_tx)

    @property
    def rx_hist(self) -> BeamHistogram:
        return BeamHistogram.from_selections(self._valid["rx_beam"], self.n_rx)

    @property
    def joint_counts(self) -> np.ndarray:
        v = self._valid
        flat = v["rx_beam"].astype(np.int64) * self.n_tx + v["tx_beam"]
        return np.bincount(flat, minlength=self.n_rx * self.n_tx).reshape(self.n_rx, self.n_tx)

    @property
    def tx_entropy(self) -> EntropyReport:
        return entropy_report(self.tx_hist)

    @property
    def rx_entropy(self) -> EntropyReport:
        return entropy_report(self.rx_hist)

    @property
    def joint_entropy_bits(self) -> float:
        return joint_entropy(self.joint_counts)

    @property
    def power_invariance_violations(self) -> int:
        return int(self.records["violations"].sum())

    @property
    def rank_summary(self) -> dict:
        v = self._valid
        n = v.shape[0]
        if n == 0:
            return {"mean_effective_rank": float("nan"), "max_sigma_ratio": float("nan"),
                    "mean_sigma_ratio": float("nan"), "rank_one_fraction": float("nan")}
        return {
            "mean_effective_rank": math.fsum(v["eff_rank"]) / n,
            "max_sigma_ratio": float(v["sigma_ratio"].max()),
            "mean_sigma_ratio": math.fsum(v["sigma_ratio"]) / n,
            "rank_one_fraction": int(np.count_nonzero(v["eff_rank"] == 1)) / n,
        }

    @property
    def probe_metrics(self) -> dict:
        return {
            "tx": expected_probe_count(to_pmf(self.tx_hist)),
            "rx": expected_probe_count(to_pmf(self.rx_hist)),
        }

    @property
    def entropy_trace(self) -> list[tuple[int, float, float]]:
        """(runs so far, rx entropy bits, tx entropy bits) every ``entropy_trace_stride`` runs.

        The last point is always the full covered set, so its values equal
        the reported entropies.
        """
        stride = self.spec.entropy_trace_stride
        n = self.n_covered
        marks = list(range(stride, n + 1, stride))
        if n and (not marks or marks[-1] != n):
            marks.append(n)
        rec = self.records
        out = []
        for k in marks:
            head = rec[:k]
            head = head[~head["degenerate"]]
            if head.shape[0] == 0:
                continue
            rx = BeamHistogram.from_selections(head["rx_beam"], self.n_rx)
            tx = BeamHistogram.from_selections(head["tx_beam"], self.n_tx)
            out.append((k, entropy_report(rx).entropy_bits, entropy_report(tx).entropy_bits))
        return out


def merge(a: ExperimentResult, b: ExperimentResult) -> ExperimentResult:
    if a.spec != b.spec:
        raise DomainError("cannot merge results of different experiment specs")
    recs = np.concatenate([a.records, b.records])
    order = np.argsort(recs["run"], kind="stable")
    recs = recs[order]
    if recs.shape[0] > 1 and np.any(np.diff(recs["run"]) == 0):
        raise DomainError("cannot merge results with overlapping run ranges")
    samples = {**a.sv_samples, **b.sv_samples}
    return ExperimentResult(a.spec, recs, samples)


def merge_all(results: Iterable[ExperimentResult], spec: ExperimentSpec) -> ExperimentResult:
    out = ExperimentResult.empty(spec)
    for r in results:
        out = merge(out, r)
    return out


class _Context:
    """Per-spec state shared read-only by every run."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.tx_cb: Codebook = dft_codebook(spec.tx_geom)
        self.rx_cb: Codebook = dft_codebook(spec.rx_geom)
        self.deltas = [d for d in spec.tx_power_deltas_db if d != 0]


def _evaluate(ctx: _Context, run: int, h: ChannelMatrix, rec: np.ndarray, samples: dict):
    spec = ctx.spec
    sel = select_best(sweep(h, ctx.tx_cb, ctx.rx_cb))
    rep = analyze(h, spec.rank_threshold)
    violations = 0
    if not sel.degenerate:
        for d in ctx.deltas:
            s2 = select_best(sweep(apply_tx_power(h, d), ctx.tx_cb, ctx.rx_cb))
            if (s2.tx_beam, s2.rx_beam) != (sel.tx_beam, sel.rx_beam):
                violations += 1
    rec["run"] = run
    rec["tx_beam"] = sel.tx_beam
    rec["rx_beam"] = sel.rx_beam
    rec["degenerate"] = sel.degenerate
    rec["eff_rank"] = rep.effective_rank
    rec["sigma_ratio"] = rep.sigma_ratio
    rec["condition_db"] = rep.condition_number_db
    rec["violations"] = violations
    if run < spec.sv_sample_runs:
        samples[run] = rep.singular_values


def simulate_run(spec: ExperimentSpec, run: int) -> tuple[ChannelRealization, ChannelMatrix]:
    """Regenerate the realization and channel matrix of one run."""
    if spec.scenario is None:
        raise ConfigError("spec has no scenario to generate channels from")
    real = draw_realization(spec.scenario, substream(spec.master_seed, run))
    h = realization_to_matrix(real, spec.tx_geom, spec.rx_geom, 0.0, meta=spec.scenario)
    return real, h


def _run_range(ctx: _Context, start: int, stop: int) -> ExperimentResult:
    rec = np.zeros(stop - start, dtype=RECORD_DTYPE)
    samples: dict[int, np.ndarray] = {}
    for i, r in enumerate(range(start, stop)):
        _, h = simulate_run(ctx.spec, r)
        _evaluate(ctx, r, h, rec[i], samples)
    return ExperimentResult(ctx.spec, rec, samples)


def _chunks(start: int, stop: int, size: int):
    return [(s, min(s + size, stop)) for s in range(start, stop, size)]


def run(
    spec: ExperimentSpec,
    threads: int = 1,
    run_range: tuple[int, int] | None = None,
) -> ExperimentResult:
    """Run the experiment over ``run_range`` (default: all ``spec.n_runs`` runs)."""
    if spec.scenario is None:
        raise ConfigError("spec has no scenario; use run_on_matrices for ingested channels", "scenario")
    start, stop = run_range if run_range is not None else (0, spec.n_runs)
    if not 0 <= start <= stop <= spec.n_runs:
        raise ConfigError(f"run range [{start}, {stop}) outside [0, {spec.n_runs})")
    ctx = _Context(spec)
    chunks = _chunks(start, stop, CHUNK_RUNS)
    if threads <= 1 or len(chunks) <= 1:
        parts = [_run_range(ctx, a, b) for a, b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: _run_range(ctx, *ab), chunks))
    return merge_all(parts, spec)


def run_on_matrices(spec: ExperimentSpec, matrices: Sequence[ChannelMatrix]) -> ExperimentResult:
    """Beam-train externally supplied channels; run index = position in ``matrices``."""
    ctx = _Context(spec)
    rec = np.zeros(len(matrices), dtype=RECORD_DTYPE)
    samples: dict[int, np.ndarray] = {}
    for i, h in enumerate(matrices):
        if h.shape != (spec.rx_geom.num_elements, spec.tx_geom.num_elements):
            raise DomainError(
                f"matrix {i} has shape {h.shape}, expected "
                f"({spec.rx_geom.num_elements}, {spec.tx_geom.num_elements})"
            )
        _evaluate(ctx, i, h, rec[i], samples)
    return ExperimentResult(spec, rec, samples)


def subcarrier_consistency(spec: ExperimentSpec, realization: ChannelRealization) -> dict:
    """Spread of the largest singular value across the sub-carrier sweep."""
    check = spec.subcarrier_check
    if check is None:
        raise ConfigError("spec has no subcarrier_check", "subcarrier_check")
    carrier = spec.scenario.carrier_ghz if spec.scenario is not None else 0.0
    ref_h = realization_to_matrix(realization, spec.tx_geom, spec.rx_geom, 0.0, carrier)
    ref = singular_values(ref_h)[0]
    sig = []
    for off in subcarrier_offsets(check.bandwidth_hz, check.count):
        h = realization_to_matrix(realization, spec.tx_geom, spec.rx_geom, float(off), carrier)
        sig.append(float(singular_values(h)[0]))
    sig = np.array(sig)
    spread = float(np.max(np.abs(sig - ref)) / ref) if ref > 0 else 0.0
    return {"max_rel_sigma1_spread": spread, "per_subcarrier_sigma1": sig.tolist()}
