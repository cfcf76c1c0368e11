"""Energy harvesting, battery quantization and the mirrored battery state.

Battery energies are handled as integer level indices on a uniform grid
``level(i) = p_b * i / (L_eff + 1)``. Working on indices keeps every
residual exactly on the grid; watt values are derived only for reporting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


class Mode(enum.IntEnum):
    """Relay operating mode for one block."""

    HARVEST = 0
    RELAY = 1
    HARVEST_RELAY = 2
    IDLE = 3

    @property
    def transmits(self) -> bool:
        return self in (Mode.RELAY, Mode.HARVEST_RELAY)

    @property
    def harvests(self) -> bool:
        return self in (Mode.HARVEST, Mode.HARVEST_RELAY)

    @property
    def label(self) -> str:
        return {0: "mu_h", 1: "mu_r", 2: "mu_hr", 3: "mu_phi"}[int(self)]


#: marker returned by :meth:`EnergyGrid.required_index` when p_r > p_b
INFEASIBLE = -1


class BatteryOverdraw(RuntimeError):
    pass


def relay_power_virtual(g1, cfg: SystemConfig):
    """Self-sustained relay power of the virtual harvest-transmit model.

    Solves ``p_r = eta*rho*(p_s*g1 + p_r*g_a)`` for ``p_r``.
    """
    loop = cfg.self_energy_loop
    if loop >= 1.0:
        raise ValueError("self-energy instability: eta*rho*g_a >= 1")
    return cfg.eta * cfg.rho * cfg.p_s * g1 / (1.0 - loop)


def harvest_incident_power(mode: Mode, g1, p_r, cfg: SystemConfig):
    """Power entering the EH receiver before conversion.

    In harvest-only mode the relay is silent and the whole received signal
    is routed to the harvester; in harvest-relay mode only the ``rho``
    share is, and it includes the relay's own leaked transmission.
    """
    if np.any(np.asarray(p_r) < 0):
        raise ValueError("p_r must be non-negative")
    if mode == Mode.HARVEST:
        return cfg.p_s * g1
    if mode == Mode.HARVEST_RELAY:
        return cfg.rho * (cfg.p_s * g1 + p_r * cfg.g_a)
    return 0.0


def harvested_power(incident, cfg: SystemConfig):
    """Converted power, zero below the receiver sensitivity ``eps_min``.

    Works elementwise on arrays.
    """
    incident = np.asarray(incident, dtype=float)
    out = np.where(incident < cfg.eps_min, 0.0, cfg.eta * incident)
    return float(out) if out.ndim == 0 else out


def effective_levels(p_b: float, L: int, eps_min: float) -> int:
    """L_eff = min(L, floor(p_b / eps_min)): no spacing finer than eps_min."""
    if eps_min <= 0.0:
        return int(L)
    ratio = p_b / eps_min
    if ratio >= L:
        return int(L)
    return int(math.floor(ratio))


@dataclass(frozen=True)
class EnergyGrid:
    p_b: float
    L_eff: int

    @classmethod
    def from_config(cls, cfg: SystemConfig, L: int | None = None) -> "EnergyGrid":
        L = cfg.level_count_L if L is None else L
        return cls(cfg.p_b, effective_levels(cfg.p_b, L, cfg.eps_min))

    @property
    def top(self) -> int:
        """Index of the full-battery level, L_eff + 1."""
        return self.L_eff + 1

    def level(self, i):
        """Energy of level index ``i`` (scalar or array)."""
        i = np.asarray(i)
        out = self.p_b * (i / self.top)
        return float(out) if out.ndim == 0 else out

    @property
    def levels(self) -> np.ndarray:
        return self.level(np.arange(self.top + 1))

    def harvest_index(self, harvested):
        """Largest index whose level is strictly below ``harvested`` (capped)."""
        h = np.asarray(harvested, dtype=float)
        n = self.top
        with np.errstate(invalid="ignore"):
            i = np.clip(np.ceil(h * (n / self.p_b)) - 1.0, 0, n).astype(np.int64)
        # one-ulp corrections around exact grid boundaries
        for _ in range(2):
            up = (i < n) & (self.p_b * ((i + 1) / n) < h)
            i = i + up
            down = (i > 0) & (self.p_b * (i / n) >= h)
            i = i - down
        return int(i) if i.ndim == 0 else i

    def required_index(self, p_r):
        """Smallest index >= 1 whose level covers ``p_r``, else INFEASIBLE."""
        p = np.asarray(p_r, dtype=float)
        n = self.top
        with np.errstate(invalid="ignore", over="ignore"):
            i = np.clip(np.ceil(np.minimum(p, self.p_b) * (n / self.p_b)), 1, n).astype(np.int64)
        for _ in range(2):
            down = (i > 1) & (self.p_b * ((i - 1) / n) >= p)
            i = i - down
            up = (i < n) & (self.p_b * (i / n) < p)
            i = i + up
        i = np.where(p > self.p_b, INFEASIBLE, i)
        return int(i) if i.ndim == 0 else i


def quantize_harvest(harvested: float, grid: EnergyGrid) -> float:
    return grid.level(grid.harvest_index(harvested))


def required_level(p_r: float, grid: EnergyGrid) -> float:
    """Required transmit energy level; ``math.inf`` when p_r exceeds p_b."""
    i = grid.required_index(p_r)
    return math.inf if i == INFEASIBLE else grid.level(i)


@dataclass(frozen=True)
class BatteryGroup:
    """Both batteries of the relay; they are kept at the same level."""

    grid: EnergyGrid
    index: int = 0

    def __post_init__(self):
        if not 0 <= self.index <= self.grid.top:
            raise ValueError(f"battery index {self.index} outside [0, {self.grid.top}]")

    @property
    def residual(self) -> float:
        return self.grid.level(self.index)


def apply_update(battery: BatteryGroup, spent: int = 0, gained: int = 0) -> BatteryGroup:
    """Spend then credit level quanta, saturating at the full battery."""
    if spent > battery.index:
        raise BatteryOverdraw(f"spending level {spent} from residual level {battery.index}")
    return BatteryGroup(battery.grid, min(battery.grid.top, battery.index - spent + gained))
