"""Config parsing, channel CSV ingestion, and CSV report emission."""

from __future__ import annotations

import csv
import datetime as _dt
import os
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .array import ArrayGeometry
from .beamstats import BeamHistogram
from .channel import ChannelMatrix, ScenarioConfig, scenario_defaults
from .errors import ChannelFormatError, ConfigError, ConstraintError, DomainError
from .montecarlo import DEFAULT_TRACE_STRIDE, ExperimentResult, ExperimentSpec, SubcarrierCheck
from .specdecomp import DEFAULT_RANK_THRESHOLD

OUT_DIR_ENV = "BEAMENTROPY_OUT_DIR"
DEFAULT_OUT_DIR = "results"
REPORT_FORMATS = ("csv", "plot-data")

SUMMARY_FIELDS = (
    "nt", "nr", "runs", "seed",
    "tx_entropy_bits", "rx_entropy_bits", "tx_rel_entropy", "rx_rel_entropy",
    "joint_entropy_bits", "mean_eff_rank", "expected_probes_tx", "expected_probes_rx",
    "power_invariance_violations",
)
HIST_FIELDS = ("beam_index", "count", "probability")


def fmt(x) -> str:
    """Shortest string that parses back to the same double (or int)."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


# ---------------------------------------------------------------------------
# channel CSV
# ---------------------------------------------------------------------------


def _channel_header(h: ChannelMatrix) -> str:
    nr, nt = h.shape
    return f"# rows={nr} cols={nt} carrier_ghz={fmt(h.carrier_ghz)}"


def write_channels(path, matrices: Sequence[ChannelMatrix] | ChannelMatrix) -> None:
    if isinstance(matrices, ChannelMatrix):
        matrices = [matrices]
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        for h in matrices:
            f.write(_channel_header(h) + "\n")
            nr, nt = h.shape
            e = h.entries
            for i in range(nr):
                for j in range(nt):
                    z = e[i, j]
                    f.write(f"{i},{j},{fmt(z.real)},{fmt(z.imag)}\n")


def _parse_header(line: str, lineno: int) -> tuple[int, int, float]:
    body = line[1:].split()
    kv = {}
    for tok in body:
        if "=" not in tok:
            raise ChannelFormatError(f"malformed header token {tok!r}", lineno)
        k, v = tok.split("=", 1)
        kv[k] = v
    try:
        rows, cols, carrier = int(kv["rows"]), int(kv["cols"]), float(kv["carrier_ghz"])
    except KeyError as e:
        raise ChannelFormatError(f"header is missing {e.args[0]!r}", lineno) from None
    except ValueError:
        raise ChannelFormatError(f"non-numeric header value in {line.strip()!r}", lineno) from None
    if rows < 1 or cols < 1:
        raise ChannelFormatError(f"header dimensions must be positive, got rows={rows} cols={cols}", lineno)
    return rows, cols, carrier


def ingest_channels(path) -> list[ChannelMatrix]:
    """Read every matrix block from a channel CSV file.

    Each block is a ``# rows=.. cols=.. carrier_ghz=..`` header followed by
    rows*cols ``row,col,re,im`` lines in row-major order.
    """
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    out = []
    n = len(lines)
    pos = 0
    while pos < n:
        lineno = pos + 1
        line = lines[pos]
        if not line.startswith("#"):
            raise ChannelFormatError("expected a '# rows=.. cols=.. carrier_ghz=..' header", lineno)
        rows, cols, carrier = _parse_header(line, lineno)
        pos += 1
        entries = np.empty((rows, cols), dtype=np.complex128)
        for k in range(rows * cols):
            lineno = pos + 1
            if pos >= n or lines[pos].startswith("#"):
                raise ChannelFormatError(
                    f"truncated matrix: expected {rows * cols} entries, found {k}", lineno
                )
            parts = lines[pos].split(",")
            if len(parts) != 4:
                raise ChannelFormatError(f"expected 4 fields row,col,re,im, got {len(parts)}", lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
                re_, im_ = float(parts[2]), float(parts[3])
            except ValueError:
                raise ChannelFormatError(f"non-numeric field in {lines[pos]!r}", lineno) from None
            if (i, j) != divmod(k, cols):
                raise ChannelFormatError(
                    f"entry ({i},{j}) out of row-major order, expected {divmod(k, cols)}", lineno
                )
            entries[i, j] = complex(re_, im_)
            pos += 1
        try:
            out.append(ChannelMatrix(entries, carrier, "ingested"))
        except DomainError as e:
            raise ChannelFormatError(str(e), lineno) from None
    return out


read_channels = ingest_channels


# ---------------------------------------------------------------------------
# histogram CSV
# ---------------------------------------------------------------------------


def write_histogram(path, hist: BeamHistogram) -> None:
    total = hist.total
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HIST_FIELDS)
        for i, c in enumerate(hist.counts):
            w.writerow((i, int(c), fmt(c / total if total else 0.0)))


def read_histogram(path) -> tuple[BeamHistogram, np.ndarray]:
    """Parse a histogram CSV back into counts and the probability column."""
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != HIST_FIELDS:
        raise ChannelFormatError(f"expected header {','.join(HIST_FIELDS)}", 1)
    counts, probs = [], []
    for k, row in enumerate(rows[1:]):
        if int(row[0]) != k:
            raise ChannelFormatError(f"beam_index {row[0]} out of order", k + 2)
        counts.append(int(row[1]))
        probs.append(float(row[2]))
    return BeamHistogram(np.array(counts, dtype=np.int64)), np.array(probs)


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig | None
    nt: int = 256
    nr: int = 16
    tx_spacing: float = 0.5
    rx_spacing: float = 0.5
    runs: int = 20_000
    seed: int = 0
    tx_power_deltas_db: tuple[float, ...] = (0.0,)
    trace_stride: int = DEFAULT_TRACE_STRIDE
    rank_threshold: float = DEFAULT_RANK_THRESHOLD
    subcarrier_bandwidth_hz: float | None = None
    subcarrier_count: int | None = None
    threads: int = 1
    out: str | None = None
    formats: tuple[str, ...] = REPORT_FORMATS
    ingest: str | None = None

    def to_spec(self, n_runs: int | None = None) -> ExperimentSpec:
        sub = None
        if self.subcarrier_count is not None:
            sub = SubcarrierCheck(float(self.subcarrier_bandwidth_hz or 0.0), int(self.subcarrier_count))
        return ExperimentSpec(
            scenario=self.scenario,
            tx_geom=ArrayGeometry(self.nt, self.tx_spacing),
            rx_geom=ArrayGeometry(self.nr, self.rx_spacing),
            n_runs=self.runs if n_runs is None else n_runs,
            master_seed=self.seed,
            tx_power_deltas_db=self.tx_power_deltas_db,
            subcarrier_check=sub,
            entropy_trace_stride=self.trace_stride,
            rank_threshold=self.rank_threshold,
        )

    def out_dir(self) -> Path:
        return Path(os.environ.get(OUT_DIR_ENV) or self.out or DEFAULT_OUT_DIR)


def _as_int(v):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ValueError
    f = float(v)
    if f != int(f):
        raise ValueError
    return int(f)


def _as_float(v):
    if isinstance(v, bool):
        raise ValueError
    return float(v)


def _as_float_list(v):
    if not isinstance(v, (list, tuple)):
        v = [v]
    return tuple(_as_float(x) for x in v)


def _as_str(v):
    if not isinstance(v, str):
        raise ValueError
    return v


def _as_formats(v):
    items = [v] if isinstance(v, str) else list(v)
    for it in items:
        if it not in REPORT_FORMATS:
            raise ValueError
    return tuple(items)


_TOP_KEYS = {
    "scenario": (_as_str, "a scenario name (UMi, UMa, RMa)"),
    "carrier_ghz": (_as_float, "a number"),
    "runs": (_as_int, "an integer"),
    "seed": (_as_int, "an integer"),
    "nt": (_as_int, "an integer"),
    "nr": (_as_int, "an integer"),
    "tx_spacing": (_as_float, "a number"),
    "rx_spacing": (_as_float, "a number"),
    "tx_power_deltas_db": (_as_float_list, "a list of numbers"),
    "trace_stride": (_as_int, "an integer"),
    "rank_threshold": (_as_float, "a number"),
    "subcarrier_bandwidth_hz": (_as_float, "a number"),
    "subcarrier_count": (_as_int, "an integer"),
    "threads": (_as_int, "an integer"),
    "out": (_as_str, "a path"),
    "formats": (_as_formats, f"a list drawn from {list(REPORT_FORMATS)}"),
    "ingest": (_as_str, "a path"),
}
SECTION = "channel"
_SECTION_KEYS = {
    f.name for f in fields(ScenarioConfig) if f.name not in ("kind", "carrier_ghz")
}
_STR_SECTION_KEYS = {"environment", "polarization"}


def _key_lines(node) -> dict[str, int]:
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if isinstance(k, yaml.ScalarNode)}


def parse_config(text: str) -> RunConfig:
    """Validate a YAML run configuration.

    Top-level keys are flat run options; the optional ``channel`` section
    overrides individual scenario model parameters.
    """
    try:
        loader = yaml.SafeLoader(text)
        try:
            node = loader.get_single_node()
            data = loader.construct_document(node) if node is not None else {}
        finally:
            loader.dispose()
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else None
        raise ConfigError(f"malformed config: {getattr(e, 'problem', e)}", where) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of keys to values", "line 1")
    lines = _key_lines(node) if node is not None else {}

    def where(key, section=None):
        if section:
            sec_lines = {}
            for k, v in node.value:
                if k.value == section and isinstance(v, yaml.MappingNode):
                    sec_lines = _key_lines(v)
            return f"line {sec_lines.get(key, lines.get(section, '?'))}, field '{section}.{key}'"
        return f"line {lines.get(key, '?')}, field '{key}'"

    values: dict[str, Any] = {}
    overrides: dict[str, Any] = {}
    for key, raw in data.items():
        if key == SECTION:
            if not isinstance(raw, dict):
                raise ConfigError("must be a mapping of model parameters", where(key))
            for sk, sv in raw.items():
                if sk not in _SECTION_KEYS:
                    raise ConfigError(f"unknown key {sk!r}", where(sk, SECTION))
                try:
                    overrides[sk] = _as_str(sv) if sk in _STR_SECTION_KEYS else (
                        _as_int(sv) if sk == "max_clusters" else _as_float(sv)
                    )
                except (ValueError, TypeError):
                    raise ConfigError(f"invalid value {sv!r}", where(sk, SECTION)) from None
            continue
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown key {key!r}", where(key))
        conv, desc = _TOP_KEYS[key]
        try:
            values[key] = conv(raw)
        except (ValueError, TypeError):
            raise ConfigError(f"expected {desc}, got {raw!r}", where(key)) from None

    ingest = values.get("ingest")
    scenario_name = values.pop("scenario", None)
    carrier = values.pop("carrier_ghz", None)
    if ingest is not None:
        if scenario_name is not None or overrides:
            raise ConfigError("'ingest' replaces channel generation; drop 'scenario' and 'channel'", where("ingest"))
        scenario = None
    else:
        if scenario_name is None:
            raise ConfigError("missing required key 'scenario' (or give 'ingest')", "field 'scenario'")
        if carrier is None:
            raise ConfigError("missing required key 'carrier_ghz'", "field 'carrier_ghz'")
        try:
            scenario = scenario_defaults(scenario_name, carrier)
            if overrides:
                scenario = scenario.with_overrides(**overrides)
        except ConstraintError as e:
            raise ConfigError(str(e), where("carrier_ghz")) from None
        except DomainError as e:
            raise ConfigError(str(e), where("scenario")) from None

    if ("subcarrier_count" in values) != ("subcarrier_bandwidth_hz" in values):
        raise ConfigError("give both subcarrier_count and subcarrier_bandwidth_hz", where("subcarrier_count"))
    for key in ("runs", "nt", "nr", "trace_stride", "threads"):
        if key in values and values[key] < 1:
            raise ConfigError("must be >= 1", where(key))
    if "seed" in values and not 0 <= values["seed"] < 2**64:
        raise ConfigError("must be a 64-bit unsigned integer", where("seed"))
    if "rank_threshold" in values and not 0 < values["rank_threshold"] < 1:
        raise ConfigError("must lie in (0, 1)", where("rank_threshold"))
    for key in ("tx_spacing", "rx_spacing"):
        if key in values and not values[key] > 0:
            raise ConfigError("must be > 0", where(key))

    cfg = RunConfig(scenario=scenario, **values)
    if cfg.scenario is not None:
        cfg.to_spec()  # surfaces any remaining constraint as a ConfigError
    return cfg


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class ReportBundle:
    out_dir: Path
    summary: dict[str, Any]
    tx_hist: BeamHistogram
    rx_hist: BeamHistogram
    entropy_trace: list[tuple[int, float, float]]
    sv_samples: dict[int, np.ndarray]
    metadata: dict[str, Any]
    files: list[Path] = field(default_factory=list)


def summary_record(result: ExperimentResult) -> dict[str, Any]:
    tx, rx = result.tx_entropy, result.rx_entropy
    probes = result.probe_metrics
    return {
        "nt": result.n_tx,
        "nr": result.n_rx,
        "runs": result.n_covered,
        "seed": result.spec.master_seed,
        "tx_entropy_bits": tx.entropy_bits,
        "rx_entropy_bits": rx.entropy_bits,
        "tx_rel_entropy": tx.relative_entropy,
        "rx_rel_entropy": rx.relative_entropy,
        "joint_entropy_bits": result.joint_entropy_bits,
        "mean_eff_rank": result.rank_summary["mean_effective_rank"],
        "expected_probes_tx": probes["tx"],
        "expected_probes_rx": probes["rx"],
        "power_invariance_violations": result.power_invariance_violations,
    }


def _ensure_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".probe-"):
            pass
    except OSError as e:
        raise OSError(f"output directory {str(out)!r} is not writable: {e}") from e


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if not isinstance(x, str) else x for x in row])


def emit_reports(result: ExperimentResult, cfg: RunConfig, out_dir: Path | None = None) -> ReportBundle:
    from . import __version__, _kernels

    out = Path(out_dir) if out_dir is not None else cfg.out_dir()
    _ensure_writable(out)

    summary = summary_record(result)
    rank = result.rank_summary
    meta = {
        "seed": result.spec.master_seed,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "backend": _kernels.BACKEND,
        "source": "ingested" if result.spec.scenario is None else result.spec.scenario.kind.value,
        "carrier_ghz": "" if result.spec.scenario is None else result.spec.scenario.carrier_ghz,
        "runs_covered": result.n_covered,
        "degenerate_count": result.degenerate_count,
        "max_sigma_ratio": rank["max_sigma_ratio"],
        "mean_sigma_ratio": rank["mean_sigma_ratio"],
        "rank_one_fraction": rank["rank_one_fraction"],
    }
    bundle = ReportBundle(out, summary, result.tx_hist, result.rx_hist, result.entropy_trace,
                          dict(result.sv_samples), meta)

    files = []
    if "csv" in cfg.formats:
        p = out / "summary.csv"
        _write_rows(p, SUMMARY_FIELDS, [[summary[k] for k in SUMMARY_FIELDS]])
        files.append(p)
        for name, hist in (("rx_hist.csv", bundle.rx_hist), ("tx_hist.csv", bundle.tx_hist)):
            write_histogram(out / name, hist)
            files.append(out / name)
        p = out / "entropy_trace.csv"
        _write_rows(p, ("run_count", "rx_entropy", "tx_entropy"), bundle.entropy_trace)
        files.append(p)
        p = out / "sv_spectrum.csv"
        _write_rows(
            p, ("run", "index", "sigma", "sigma_rel"),
            [(r, k, s, s / sv[0] if sv[0] else 0.0)
             for r, sv in sorted(bundle.sv_samples.items()) for k, s in enumerate(sv)],
        )
        files.append(p)
        p = out / "metadata.csv"
        _write_rows(p, ("key", "value"), [(k, v if isinstance(v, str) else v) for k, v in meta.items()])
        files.append(p)
    if "plot-data" in cfg.formats:
        for name, hist in (("rx_hist.dat", bundle.rx_hist), ("tx_hist.dat", bundle.tx_hist)):
            p = out / name
            with open(p, "w", encoding="utf-8", newline="\n") as f:
                f.write("# beam_index count\n")
                for i, c in enumerate(hist.counts):
                    f.write(f"{i} {int(c)}\n")
            files.append(p)
    bundle.files = files
    return bundle
