"""Flat ``key = value`` configuration files and the sweep settings they carry.

Keys are the :class:`~swipt_fdr.config.SystemConfig` field names. Powers and
gains may instead be given in logarithmic units with a ``_db``/``_dbm``
suffix (``g_a_db = -10``, ``sigma_d2_dbm = -90``). Sweep-level keys:
``p_s_dbm`` (``a:b:step`` or a comma list), ``policies``, ``levels`` and
``workers``.
"""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, SinrMode, SystemConfig, ThresholdMode, db_to_linear, dbm_to_watts
from .policy import PolicyKind

DB_KEYS = {"g_a_db": "g_a", "g_b_db": "g_b", "gamma_th_db": "gamma_th"}
DBM_KEYS = {
    "sigma_a2_dbm": "sigma_a2",
    "sigma_p2_dbm": "sigma_p2",
    "sigma_d2_dbm": "sigma_d2",
    "sigma_r2_dbm": "sigma_r2",
    "eps_min_dbm": "eps_min",
}
SWEEP_KEYS = ("p_s_dbm", "policies", "levels", "workers")
# p_s itself is only set through the swept p_s_dbm grid
SYSTEM_KEYS = tuple(f.name for f in dataclasses.fields(SystemConfig) if f.name != "p_s")
ALL_KEYS = SYSTEM_KEYS + tuple(DB_KEYS) + tuple(DBM_KEYS) + SWEEP_KEYS

DEFAULT_GRID = "0:46:2"
DEFAULT_LEVELS = (4, 6, 8)


@dataclass(frozen=True)
class RunSettings:
    """A system config plus the sweep axes around it."""

    system: SystemConfig = field(default_factory=SystemConfig)
    p_s_dbm: tuple[float, ...] = ()
    policies: tuple[PolicyKind, ...] = (PolicyKind.VIRTUAL, PolicyKind.GS)
    levels: tuple[int, ...] = DEFAULT_LEVELS
    workers: int = 1


def parse_grid(text: str) -> tuple[float, ...]:
    """``"0:46:2"`` (inclusive) or ``"10,20,30"`` or ``"30"``."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"bad grid {text!r}; expected start:stop:step with step > 0")
        start, stop, step = parts
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(round(start + i * step, 9)) for i in range(n))
    values = tuple(float(p) for p in text.split(",") if p.strip())
    if not values:
        raise ValueError("empty p_s grid")
    return values


def _field_types() -> dict[str, typing.Any]:
    return typing.get_type_hints(SystemConfig)


def _coerce(name: str, text: str):
    hint = _field_types()[name]
    text = text.strip()
    if hint is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {text!r}")
    if hint is int:
        value = float(text)
        if value != int(value):
            raise ValueError(f"{name}: not an integer: {text!r}")
        return int(value)
    if hint is ThresholdMode:
        return ThresholdMode(text)
    if hint is SinrMode:
        return SinrMode(text)
    return float(text)


def apply_values(settings: RunSettings, values: dict[str, str]) -> RunSettings:
    """Overlay raw string ``values`` onto ``settings``; all errors reported at once."""
    errors = []
    sys_changes: dict[str, typing.Any] = {}
    run_changes: dict[str, typing.Any] = {}
    for key, raw in values.items():
        try:
            if key in DB_KEYS:
                target = DB_KEYS[key]
                if target in values:
                    raise ValueError(f"both {key} and {target} given")
                sys_changes[target] = db_to_linear(float(raw))
            elif key in DBM_KEYS:
                target = DBM_KEYS[key]
                if target in values:
                    raise ValueError(f"both {key} and {target} given")
                sys_changes[target] = dbm_to_watts(float(raw))
            elif key == "p_s_dbm":
                run_changes["p_s_dbm"] = parse_grid(raw)
            elif key == "policies":
                run_changes["policies"] = tuple(PolicyKind(p.strip()) for p in raw.split(",") if p.strip())
            elif key == "levels":
                run_changes["levels"] = tuple(int(p) for p in raw.split(",") if p.strip())
            elif key == "workers":
                run_changes["workers"] = int(raw)
            elif key in SYSTEM_KEYS:
                sys_changes[key] = _coerce(key, raw)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            errors.append(str(exc) if key in str(exc) else f"{key}: {exc}")
    if errors:
        raise ConfigError(errors)
    system = dataclasses.replace(settings.system, **sys_changes)
    return dataclasses.replace(settings, system=system, **run_changes)


def read_values(path: str | Path) -> dict[str, str]:
    values = {}
    errors = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            errors.append(f"line {n}: expected key = value")
            continue
        key, value = line.split(sep, 1)
        key = key.strip()
        if key in values:
            errors.append(f"line {n}: duplicate key {key!r}")
        values[key] = value.strip()
    if errors:
        raise ConfigError(errors)
    return values


def load_settings(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> RunSettings:
    settings = RunSettings(p_s_dbm=parse_grid(DEFAULT_GRID))
    if path is not None:
        settings = apply_values(settings, read_values(path))
    if overrides:
        settings = apply_values(settings, overrides)
    return settings


def dump_values(settings: RunSettings) -> str:
    """Serialize settings back into the flat text format (linear units)."""
    lines = []
    for f in dataclasses.fields(SystemConfig):
        if f.name == "p_s":
            continue
        v = getattr(settings.system, f.name)
        if v is None:
            continue
        if isinstance(v, (ThresholdMode, SinrMode)):
            v = v.value
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    lines.append("p_s_dbm = " + ",".join(f"{p:g}" for p in settings.p_s_dbm))
    lines.append("policies = " + ",".join(p.value for p in settings.policies))
    lines.append("levels = " + ",".join(str(L) for L in settings.levels))
    lines.append(f"workers = {settings.workers}")
    return "\n".join(lines) + "\n"
