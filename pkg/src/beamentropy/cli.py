"""Command-line entry point.

Exit codes: 0 success, 1 config error, 2 I/O error, 3 every run degenerate.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io as bio
from .beamstats import arcsine_pmf_oracle, dft_arcsine_pmf, entropy, relative_entropy
from .errors import BeamEntropyError, ChannelFormatError, ConfigError, DomainError
from .montecarlo import run, run_on_matrices

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_DEGENERATE = 3

log = logging.getLogger("beamentropy")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="beamentropy", description="Beam entropy of clustered mm-wave MIMO channels")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Monte Carlo beam-entropy experiment from a YAML config")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--threads", type=int)

    p = sub.add_parser("ingest", help="beam-train channel matrices from a channel CSV file")
    p.add_argument("--channels", required=True, type=Path)
    p.add_argument("--nt", required=True, type=int)
    p.add_argument("--nr", required=True, type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--deltas", type=float, nargs="*", default=[0.0],
                   help="Tx power deltas (dB) for the invariance check")

    p = sub.add_parser("oracle", help="print the arcsine beam PMF and its entropy")
    p.add_argument("--beams", required=True, type=int)
    p.add_argument("--dft", action="store_true",
                   help="bins centred on the DFT beam grid instead of edge-aligned bins")
    return ap


def _finish(result, cfg, out) -> int:
    if result.degenerate_count == result.n_covered:
        print("error: every channel was degenerate (all-zero); no beam statistics", file=sys.stderr)
        return EXIT_DEGENERATE
    bundle = bio.emit_reports(result, cfg, out)
    s = bundle.summary
    print(
        f"rx entropy {s['rx_entropy_bits']:.4f} bits (relative {s['rx_rel_entropy']:.4f}), "
        f"tx entropy {s['tx_entropy_bits']:.4f} bits (relative {s['tx_rel_entropy']:.4f}), "
        f"runs {s['runs']}, degenerate {result.degenerate_count}, "
        f"power-invariance violations {s['power_invariance_violations']}"
    )
    print(f"reports written to {bundle.out_dir}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = bio.load_config(args.config)
    overrides = {k: getattr(args, k) for k in ("runs", "seed", "threads") if getattr(args, k) is not None}
    if overrides:
        cfg = replace(cfg, **overrides)
    if cfg.ingest is not None:
        matrices = bio.ingest_channels(cfg.ingest)
        if not matrices:
            raise ConfigError(f"no matrices in {cfg.ingest}", "field 'ingest'")
        result = run_on_matrices(cfg.to_spec(n_runs=len(matrices)), matrices)
    else:
        spec = cfg.to_spec()
        log.info("running %d realizations of %s at %g GHz", spec.n_runs, spec.scenario.kind.value,
                 spec.scenario.carrier_ghz)
        result = run(spec, threads=cfg.threads)
    return _finish(result, cfg, args.out)


def _cmd_ingest(args) -> int:
    matrices = bio.ingest_channels(args.channels)
    if not matrices:
        raise ConfigError(f"no matrices in {args.channels}", "--channels")
    cfg = bio.RunConfig(scenario=None, nt=args.nt, nr=args.nr, runs=len(matrices),
                        tx_power_deltas_db=tuple(args.deltas), ingest=str(args.channels))
    for k, h in enumerate(matrices):
        if h.shape != (args.nr, args.nt):
            raise ConfigError(f"matrix {k} is {h.shape[0]}x{h.shape[1]}, expected {args.nr}x{args.nt}", "--nt/--nr")
    result = run_on_matrices(cfg.to_spec(), matrices)
    return _finish(result, cfg, args.out)


def _cmd_oracle(args) -> int:
    pmf = dft_arcsine_pmf(args.beams) if args.dft else arcsine_pmf_oracle(args.beams)
    print("beam_index,probability")
    for i, p in enumerate(pmf.probs):
        print(f"{i},{bio.fmt(p)}")
    print(f"# entropy_bits={entropy(pmf)!r} relative={relative_entropy(pmf)!r}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"run": _cmd_run, "ingest": _cmd_ingest, "oracle": _cmd_oracle}[args.command]
    try:
        return handler(args)
    except (ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ChannelFormatError) as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except BeamEntropyError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
