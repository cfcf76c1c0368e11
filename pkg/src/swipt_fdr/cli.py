"""``swipt-fdr-sim`` command line entry point.

Exit codes: 0 success, 1 internal invariant failure, 2 configuration error,
3 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import QuadratureError, QuadratureSpec, outage_virtual_quadrature
from .config import ConfigError, dbm_to_watts, validate_config
from .configfile import ALL_KEYS, load_settings
from .engine import SimulationInvariantError, run_sweep, run_trial
from .policy import PolicyKind
from .report import RunManifest, write_oracle, write_sweep, write_trace

log = logging.getLogger("swipt_fdr")

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value configuration file")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
    p.add_argument("-v", "--verbose", action="store_true")
    keys = p.add_argument_group("configuration overrides (same names as config-file keys)")
    for key in ALL_KEYS:
        flags = [f"--{key}"]
        dashed = key.replace("_", "-")
        if dashed != key:
            flags.append(f"--{dashed}")
        keys.add_argument(*flags, dest=f"key_{key}", metavar="VALUE", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swipt-fdr-sim",
        description="Outage simulation of a full-duplex AF relay powered by power-splitting SWIPT.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="Monte Carlo outage versus p_s")
    _add_common(sweep)
    sweep.add_argument("--no-plot", action="store_true", help="skip the SVG figure")

    oracle = sub.add_parser("oracle", help="quadrature outage of the virtual model (no RNG)")
    _add_common(oracle)
    oracle.add_argument("--abs-tol", type=float, default=QuadratureSpec.abs_tol)
    oracle.add_argument("--rel-tol", type=float, default=QuadratureSpec.rel_tol)
    oracle.add_argument("--max-subdivisions", type=int, default=QuadratureSpec.max_subdivisions)

    trace = sub.add_parser("trace", help="per-block GS trajectory for hand verification")
    _add_common(trace)
    trace.add_argument("-n", "--blocks", type=int, default=20, help="number of blocks (default 20)")
    trace.add_argument("--g1", type=float, help="pin the source-relay gain for every block")
    trace.add_argument("--g2", type=float, help="pin the relay-destination gain for every block")
    trace.add_argument("--gains", type=Path, help="CSV of per-block 'g1,g2' pairs; the first n rows are used")
    return parser


def _overrides(args) -> dict[str, str]:
    return {k: getattr(args, f"key_{k}") for k in ALL_KEYS if getattr(args, f"key_{k}") is not None}


def _settings(args):
    settings = load_settings(args.config, _overrides(args))
    validate_config(settings.system.replace(p_s=dbm_to_watts(settings.p_s_dbm[0])))
    return settings


def cmd_sweep(args, settings) -> int:
    rows = run_sweep(settings.policies, settings.p_s_dbm, settings.system, settings.levels, settings.workers)
    out: Path = args.out
    manifest = RunManifest.create("sweep", settings)
    mpath = out / "sweep.manifest.json"
    manifest.write(mpath)
    write_sweep(out / "sweep.csv", rows, manifest, mpath)
    if not args.no_plot:
        from .plotting import plot_outage

        plot_outage(rows, out / "sweep.svg")
    log.info("wrote %d rows to %s", len(rows), out / "sweep.csv")
    return EXIT_OK


def cmd_oracle(args, settings) -> int:
    spec = QuadratureSpec(args.abs_tol, args.rel_tol, args.max_subdivisions)
    points = []
    for p in settings.p_s_dbm:
        cfg = validate_config(settings.system.replace(p_s=dbm_to_watts(p)))
        points.append((p, outage_virtual_quadrature(cfg, spec)))
    out: Path = args.out
    manifest = RunManifest.create("oracle", settings)
    mpath = out / "oracle.manifest.json"
    manifest.write(mpath)
    write_oracle(out / "oracle.csv", points, manifest, mpath)
    return EXIT_OK


def read_gains(path: Path, n: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``n`` rows of a two-column gains file; a non-numeric first row is a header."""
    rows = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError([f"gains file: {exc}"]) from exc
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [x.strip() for x in line.split(",")]
        try:
            g1, g2 = (float(x) for x in parts)
        except ValueError:
            if not rows and i == 1:
                continue
            raise ConfigError([f"gains file line {i}: expected two numbers"]) from None
        if not (np.isfinite(g1) and np.isfinite(g2) and g1 >= 0 and g2 > 0):
            raise ConfigError([f"gains file line {i}: need g1 >= 0 and g2 > 0"])
        rows.append((g1, g2))
    if len(rows) < n:
        raise ConfigError([f"gains file has {len(rows)} rows, {n} blocks requested"])
    arr = np.array(rows[:n], dtype=float).reshape(n, 2)
    return arr[:, 0], arr[:, 1]


def cmd_trace(args, settings) -> int:
    if args.blocks < 0:
        raise ConfigError(["blocks must be non-negative"])
    if (args.g1 is None) != (args.g2 is None):
        raise ConfigError(["--g1 and --g2 must be given together"])
    if args.gains is not None and args.g1 is not None:
        raise ConfigError(["--gains cannot be combined with --g1/--g2"])
    p = settings.p_s_dbm[0]
    cfg = validate_config(settings.system.replace(p_s=dbm_to_watts(p), n_blocks=args.blocks, warmup_blocks=0))
    gains = None if args.g1 is None else (args.g1, args.g2)
    if args.gains is not None:
        gains = read_gains(args.gains, args.blocks)
    trace = None
    if args.blocks > 0:
        from .channel import BlockStream

        stream = BlockStream.for_point(cfg.seed, p)
        trace = run_trial(PolicyKind.GS, cfg, stream, gains=gains, record=True).trace
    out: Path = args.out
    manifest = RunManifest.create("trace", settings)
    mpath = out / "trace.manifest.json"
    manifest.write(mpath)
    write_trace(out / "trace.csv", trace, manifest, mpath)
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "oracle": cmd_oracle, "trace": cmd_trace}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        settings = _settings(args)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, settings)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SimulationInvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
