"""Result tables, run manifests and trace files."""

from __future__ import annotations

import dataclasses
import datetime as _dt
import enum
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import SystemConfig
from .energy import Mode
from .engine import BlockTrace, SweepRow

SWEEP_COLUMNS = (
    "policy", "L", "p_s_dbm", "rho", "outage", "ci_low", "ci_high", "n_blocks",
    "frac_mu_h", "frac_mu_r", "frac_mu_hr", "frac_mu_phi", "mean_residual",
)
ORACLE_COLUMNS = ("p_s_dbm", "outage_quadrature", "error_bound")
TRACE_COLUMNS = ("t", "g1", "g2", "mode", "p_r", "eps", "eps_req", "E0", "outage")


def fmt_prob(x) -> str:
    return "" if x is None else f"{x:.9g}"


def _jsonable(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def config_hash(snapshot: dict) -> str:
    blob = json.dumps(snapshot, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    tool_version: str = __version__
    timestamp: str = ""
    config_hash: str = ""
    workers: int = 1

    @classmethod
    def create(cls, command: str, settings) -> "RunManifest":
        snapshot = _jsonable(settings)
        # the worker count cannot change results, so it stays out of the hash
        workers = snapshot.pop("workers", 1)
        return cls(
            command=command,
            config=snapshot,
            seed=settings.system.seed,
            workers=workers,
            timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            config_hash=config_hash(snapshot),
        )

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: tuple[str, ...], rows, manifest: RunManifest, manifest_path: Path) -> None:
    lines = [f"# manifest: {manifest_path.name} config_hash={manifest.config_hash}", ",".join(header)]
    lines += [",".join(r) for r in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def sweep_row_fields(row: SweepRow) -> list[str]:
    est = row.estimate
    fr = est.mode_fractions or {}
    return [
        row.policy.value,
        "" if row.L is None else str(row.L),
        f"{row.p_s_dbm:g}",
        f"{row.rho:g}",
        fmt_prob(est.p_outage),
        fmt_prob(est.ci_low),
        fmt_prob(est.ci_high),
        str(est.n_blocks),
        *(fmt_prob(fr.get(m)) for m in (Mode.HARVEST, Mode.RELAY, Mode.HARVEST_RELAY, Mode.IDLE)),
        f"{est.mean_residual:.9g}",
    ]


def write_sweep(path: Path, rows: list[SweepRow], manifest: RunManifest, manifest_path: Path) -> None:
    _write_csv(path, SWEEP_COLUMNS, (sweep_row_fields(r) for r in rows), manifest, manifest_path)


def write_oracle(path: Path, points, manifest: RunManifest, manifest_path: Path) -> None:
    rows = ([f"{p:g}", fmt_prob(q.outage), f"{q.error_bound:.3e}"] for p, q in points)
    _write_csv(path, ORACLE_COLUMNS, rows, manifest, manifest_path)


def write_trace(path: Path, trace: BlockTrace | None, manifest: RunManifest, manifest_path: Path) -> None:
    rows = []
    if trace is not None:
        for t in range(len(trace.mode)):
            rows.append([
                str(t),
                f"{trace.g1[t]:.9g}",
                f"{trace.g2[t]:.9g}",
                Mode(int(trace.mode[t])).label,
                f"{trace.p_r[t]:.9g}",
                f"{trace.harvested[t]:.9g}",
                "inf" if np.isinf(trace.required[t]) else f"{trace.required[t]:.9g}",
                f"{trace.residual[t]:.9g}",
                str(int(bool(trace.outage[t]))),
            ])
    _write_csv(path, TRACE_COLUMNS, rows, manifest, manifest_path)


def read_csv_rows(path: Path) -> list[dict[str, str]]:
    import csv

    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def system_snapshot(cfg: SystemConfig) -> dict:
    return _jsonable(cfg)
