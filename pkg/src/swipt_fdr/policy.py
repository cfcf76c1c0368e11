"""Mode selection for the virtual harvest-transmit and greedy switching models.

The greedy switching (GS) policy inverts the second hop: when the relay
transmits it radiates ``p_r = gamma_th * sigma_d2 / g2`` and draws the
smallest battery quantum covering it. Everything about a block except the
battery residual is fixed by the channel draw, so :func:`gs_features`
computes those quantities for whole arrays of blocks and :func:`select_mode`
resolves the residual-dependent part.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelDraw
from .config import SystemConfig, ThresholdMode
from .energy import (
    INFEASIBLE,
    EnergyGrid,
    Mode,
    harvested_power,
    relay_power_virtual,
)

__all__ = [
    "Decision",
    "GSFeatures",
    "Mode",
    "PolicyKind",
    "c1_threshold",
    "gs_decide",
    "gs_features",
    "select_mode",
    "virtual_decide",
]


class PolicyKind(str, enum.Enum):
    VIRTUAL = "virtual"
    GS = "gs"


@dataclass(frozen=True)
class Decision:
    mode: Mode
    p_r: float
    harvested_level: float
    required_level: float
    harvest_index: int = 0
    required_index: int = 0

    @property
    def transmitted(self) -> bool:
        return self.mode.transmits

    @property
    def harvested(self) -> bool:
        return self.mode.harvests


def inversion_power(g2, cfg: SystemConfig):
    """Relay power that puts the destination SNR exactly at gamma_th."""
    return cfg.gamma_th * cfg.sigma_d2 / g2


def c1_threshold(g2, cfg: SystemConfig, mode: ThresholdMode | None = None):
    """Lower bound on ``p_s*g1/sigma_r2`` for decoding at the relay in mu_hr.

    The self-consistent form solves ``gamma_r = gamma_th`` at the inversion
    power. The literal form drops the ``g2`` from the denominator, so it
    matches the self-consistent one only at ``g2 = 1``.
    """
    mode = cfg.threshold_mode if mode is None else ThresholdMode(mode)
    keep = 1.0 - cfg.rho
    if keep <= 0.0:
        raise ValueError("C1 undefined for rho = 1: no power left for information")
    num = cfg.gamma_th * (keep * cfg.g_b * cfg.gamma_th * cfg.sigma_d2 + g2 * cfg.sigma_r2)
    den = keep * cfg.sigma_r2
    if mode is ThresholdMode.SELF_CONSISTENT:
        den = den * g2
    return num / den


@dataclass
class GSFeatures:
    """Residual-independent quantities of a sequence of blocks.

    ``hop_hr``/``hop_r`` flag whether the relay could decode in mu_hr/mu_r,
    ``req`` is the required quantum index (INFEASIBLE when p_r > p_b) and
    ``gain_hr``/``gain_h`` are the harvest quanta for mu_hr/mu_h.
    """

    p_r: np.ndarray
    req: np.ndarray
    hop_hr: np.ndarray
    hop_r: np.ndarray
    gain_hr: np.ndarray
    gain_h: np.ndarray

    @property
    def tx_code(self) -> np.ndarray:
        """2 where mu_hr is admissible given enough energy, 1 for mu_r, else 0."""
        feasible = self.req != INFEASIBLE
        hr = feasible & self.hop_hr & (self.gain_hr >= 1)
        r = feasible & self.hop_r & ~hr
        return np.where(hr, 2, np.where(r, 1, 0)).astype(np.int8)


def gs_features(g1, g2, grid: EnergyGrid, cfg: SystemConfig) -> GSFeatures:
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    p_r = inversion_power(g2, cfg)
    x = cfg.p_s * g1 / cfg.sigma_r2
    if cfg.rho < 1.0:
        c1 = c1_threshold(g2, cfg)
        hop_hr = x > c1
    else:
        c1 = np.full_like(g2, np.inf)
        hop_hr = np.zeros(g2.shape, dtype=bool)
    if cfg.threshold_mode is ThresholdMode.PAPER_LITERAL:
        hop_r = (x > cfg.gamma_th) & (x <= c1)
    else:
        # mu_r runs with no power split, so gamma_r includes the full signal
        hop_r = cfg.p_s * g1 / (p_r * cfg.g_b + cfg.sigma_r2) >= cfg.gamma_th
    inc_hr = cfg.rho * (cfg.p_s * g1 + p_r * cfg.g_a)
    inc_h = cfg.p_s * g1
    gain_hr = np.asarray(grid.harvest_index(harvested_power(inc_hr, cfg)))
    gain_h = np.asarray(grid.harvest_index(harvested_power(inc_h, cfg)))
    return GSFeatures(
        p_r=p_r,
        req=np.asarray(grid.required_index(p_r)),
        hop_hr=np.asarray(hop_hr),
        hop_r=np.asarray(hop_r),
        gain_hr=gain_hr,
        gain_h=gain_h,
    )


def select_mode(tx_code: int, req: int, gain_h: int, residual_index: int) -> Mode:
    if tx_code and residual_index >= req:
        return Mode.HARVEST_RELAY if tx_code == 2 else Mode.RELAY
    if gain_h >= 1:
        return Mode.HARVEST
    return Mode.IDLE


def gs_decide(draw: ChannelDraw, residual_index: int, grid: EnergyGrid, cfg: SystemConfig) -> Decision:
    """Greedy switching decision for one block given the battery level index."""
    f = gs_features(draw.g1, draw.g2, grid, cfg)
    code, req = int(f.tx_code), int(f.req)
    gain_hr, gain_h = int(f.gain_hr), int(f.gain_h)
    mode = select_mode(code, req, gain_h, residual_index)
    required = math.inf if req == INFEASIBLE else grid.level(req)
    gained = {Mode.HARVEST_RELAY: gain_hr, Mode.HARVEST: gain_h}.get(mode, 0)
    return Decision(
        mode=mode,
        p_r=float(f.p_r) if mode.transmits else 0.0,
        harvested_level=grid.level(gained),
        required_level=required,
        harvest_index=gained,
        required_index=req,
    )


def virtual_decide(draw: ChannelDraw, cfg: SystemConfig) -> Decision:
    """Virtual harvest-transmit model: spend each block's harvest in that block."""
    p_r = float(relay_power_virtual(draw.g1, cfg))
    incident = cfg.rho * (cfg.p_s * draw.g1 + p_r * cfg.g_a)
    if incident < cfg.eps_min or p_r <= 0.0:
        return Decision(Mode.IDLE, 0.0, 0.0, 0.0)
    return Decision(Mode.HARVEST_RELAY, p_r, p_r, p_r)
