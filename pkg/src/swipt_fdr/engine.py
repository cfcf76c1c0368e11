"""Monte Carlo driver for block-fading outage simulation.

A trial is ``warmup_blocks + n_blocks`` consecutive blocks on one stream;
statistics cover only the last ``n_blocks``. GS trials carry the battery
level across blocks, so their inner loop is sequential; everything that
does not depend on the battery is computed vectorized up front.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .channel import BlockStream, sample_blocks
from .config import SinrMode, SystemConfig, ThresholdMode, dbm_to_watts, validate_config, watts_to_dbm
from .energy import EnergyGrid, Mode, relay_power_virtual
from .link import decodes, e2e_sinr, first_hop_sinr, second_hop_snr
from .policy import PolicyKind, gs_features

log = logging.getLogger(__name__)

Z95 = NormalDist().inv_cdf(0.975)
MODES = tuple(Mode)


class SimulationInvariantError(RuntimeError):
    """An internal consistency check failed during a trial."""


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float] | None:
    """95% Wilson score interval, or ``None`` when ``n == 0``."""
    if not 0 <= successes <= n:
        raise ValueError(f"need 0 <= successes <= n, got {successes}, {n}")
    if n == 0:
        return None
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / n + z2 / (4 * n * n))
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == n else min(1.0, center + half)
    return low, high


@dataclass
class OutageEstimate:
    outages: int
    n_blocks: int
    mode_counts: dict[Mode, int]
    mean_residual: float = 0.0

    @property
    def defined(self) -> bool:
        return self.n_blocks > 0

    @property
    def p_outage(self) -> float | None:
        return self.outages / self.n_blocks if self.defined else None

    @property
    def ci(self) -> tuple[float, float] | None:
        return wilson_interval(self.outages, self.n_blocks)

    @property
    def ci_low(self) -> float | None:
        return self.ci[0] if self.defined else None

    @property
    def ci_high(self) -> float | None:
        return self.ci[1] if self.defined else None

    @property
    def std_error(self) -> float | None:
        if not self.defined:
            return None
        p = self.p_outage
        return math.sqrt(p * (1.0 - p) / self.n_blocks)

    @property
    def mode_fractions(self) -> dict[Mode, float] | None:
        if not self.defined:
            return None
        return {m: self.mode_counts.get(m, 0) / self.n_blocks for m in MODES}


@dataclass
class TransitionMatrix:
    """Empirical battery-level transition counts between consecutive blocks."""

    counts: np.ndarray

    @property
    def visited(self) -> np.ndarray:
        return self.counts.sum(axis=1) > 0

    @property
    def probabilities(self) -> np.ndarray:
        """Row-normalized counts; rows of unvisited states stay all-zero."""
        rows = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.where(rows > 0, self.counts / np.where(rows > 0, rows, 1), 0.0)
        return p


@dataclass
class BlockTrace:
    g1: np.ndarray
    g2: np.ndarray
    mode: np.ndarray
    p_r: np.ndarray
    harvested: np.ndarray
    required: np.ndarray
    residual: np.ndarray
    outage: np.ndarray


@dataclass
class TrialResult:
    policy: PolicyKind
    estimate: OutageEstimate
    transitions: TransitionMatrix | None = None
    grid: EnergyGrid | None = None
    trace: BlockTrace | None = field(default=None, repr=False)


def _gs_loop(tx_code, req, gain_hr, gain_h, top: int, start: int):
    """Sequential battery recursion over level indices."""
    n = len(tx_code)
    modes = np.empty(n, dtype=np.int8)
    levels = np.empty(n, dtype=np.int64)
    k = start
    HR, R, H, I = int(Mode.HARVEST_RELAY), int(Mode.RELAY), int(Mode.HARVEST), int(Mode.IDLE)
    mode_out = [0] * n
    level_out = [0] * n
    for t, (code, q, a_hr, a_h) in enumerate(zip(tx_code.tolist(), req.tolist(), gain_hr.tolist(), gain_h.tolist())):
        if code and k >= q:
            if code == 2:
                k = k - q + a_hr
                if k > top:
                    k = top
                mode_out[t] = HR
            else:
                k -= q
                mode_out[t] = R
        elif a_h >= 1:
            k += a_h
            if k > top:
                k = top
            mode_out[t] = H
        else:
            mode_out[t] = I
        level_out[t] = k
    modes[:] = mode_out
    levels[:] = level_out
    return modes, levels


def _check_battery(modes, before, after, req, gain_hr, gain_h, top):
    spent = np.where((modes == Mode.RELAY) | (modes == Mode.HARVEST_RELAY), req, 0)
    gained = np.where(modes == Mode.HARVEST_RELAY, gain_hr, np.where(modes == Mode.HARVEST, gain_h, 0))
    if np.any(spent > before):
        raise SimulationInvariantError("battery overdraw")
    expected = before - spent + gained
    ok = (after == expected) | ((expected > top) & (after == top))
    if not np.all(ok) or np.any(after < 0) or np.any(after > top):
        raise SimulationInvariantError("battery energy balance violated")


def _tally(outage: np.ndarray, modes: np.ndarray, mean_residual: float) -> OutageEstimate:
    counts = np.bincount(modes.astype(np.int64), minlength=len(MODES))
    return OutageEstimate(
        outages=int(np.count_nonzero(outage)),
        n_blocks=int(outage.size),
        mode_counts={m: int(counts[m]) for m in MODES},
        mean_residual=mean_residual,
    )


def _trial_gains(cfg, stream, gains):
    total = cfg.warmup_blocks + cfg.n_blocks
    if gains is not None:
        g1, g2 = (np.broadcast_to(np.asarray(g, dtype=float), (total,)).copy() for g in gains)
        return g1, g2
    if stream is None:
        stream = BlockStream.for_point(cfg.seed, watts_to_dbm(cfg.p_s))
    return sample_blocks(stream, cfg, total)


def run_virtual(cfg: SystemConfig, g1: np.ndarray, g2: np.ndarray, record: bool = False) -> TrialResult:
    p_r = relay_power_virtual(g1, cfg)
    incident = cfg.rho * (cfg.p_s * g1 + p_r * cfg.g_a)
    on = (incident >= cfg.eps_min) & (p_r > 0)
    p_r = np.where(on, p_r, 0.0)
    gamma_r = first_hop_sinr(g1, p_r, cfg.rho, cfg)
    gamma_d = second_hop_snr(g2, p_r, cfg)
    outage = ~(on & decodes(e2e_sinr(gamma_r, gamma_d, cfg.sinr_mode), cfg.gamma_th))
    modes = np.where(on, int(Mode.HARVEST_RELAY), int(Mode.IDLE)).astype(np.int8)
    w = cfg.warmup_blocks
    est = _tally(outage[w:], modes[w:], 0.0)
    trace = None
    if record:
        zeros = np.zeros_like(g1)
        trace = BlockTrace(g1, g2, modes, p_r, p_r.copy(), p_r.copy(), zeros, outage)
    return TrialResult(PolicyKind.VIRTUAL, est, None, None, trace)


def run_gs(cfg: SystemConfig, g1: np.ndarray, g2: np.ndarray, L: int | None = None, record: bool = False) -> TrialResult:
    grid = EnergyGrid.from_config(cfg, L)
    f = gs_features(g1, g2, grid, cfg)
    code = f.tx_code
    start = min(cfg.initial_energy_level, grid.top)
    modes, after = _gs_loop(code, f.req, f.gain_hr, f.gain_h, grid.top, start)
    before = np.concatenate(([start], after[:-1])) if after.size else after
    _check_battery(modes, before, after, f.req, f.gain_hr, f.gain_h, grid.top)

    tx = (modes == Mode.RELAY) | (modes == Mode.HARVEST_RELAY)
    rho_eff = np.where(modes == Mode.HARVEST_RELAY, cfg.rho, 0.0)
    p_r = np.where(tx, f.p_r, 0.0)
    gamma_r = first_hop_sinr(g1, p_r, rho_eff, cfg)
    gamma_d = second_hop_snr(g2, p_r, cfg)
    outage = ~(tx & decodes(e2e_sinr(gamma_r, gamma_d, cfg.gs_sinr_mode), cfg.gamma_th))
    if (
        cfg.threshold_mode is ThresholdMode.SELF_CONSISTENT
        and cfg.gs_sinr_mode is SinrMode.MIN_APPROX
        and not np.array_equal(outage, ~tx)
    ):
        raise SimulationInvariantError("GS decoding failed while transmitting")

    w = cfg.warmup_blocks
    levels = grid.level(after[w:]) if after[w:].size else np.zeros(0)
    mean_residual = float(np.mean(levels)) if levels.size else 0.0
    est = _tally(outage[w:], modes[w:], mean_residual)

    size = grid.top + 1
    counts = np.zeros((size, size), dtype=np.int64)
    np.add.at(counts, (before[w:], after[w:]), 1)
    trace = None
    if record:
        gained = np.where(modes == Mode.HARVEST_RELAY, f.gain_hr, np.where(modes == Mode.HARVEST, f.gain_h, 0))
        required = np.where(f.req < 0, np.inf, grid.level(np.maximum(f.req, 0)))
        trace = BlockTrace(g1, g2, modes, p_r, grid.level(gained), required, grid.level(after), outage)
    return TrialResult(PolicyKind.GS, est, TransitionMatrix(counts), grid, trace)


def run_trial(
    policy: PolicyKind | str,
    cfg: SystemConfig,
    stream: BlockStream | None = None,
    *,
    L: int | None = None,
    gains: tuple | None = None,
    record: bool = False,
) -> TrialResult:
    """Simulate one policy at one operating point.

    ``gains=(g1, g2)`` pins the channel (scalars or per-block arrays) instead
    of sampling; ``record=True`` keeps the per-block trace.
    """
    policy = PolicyKind(policy)
    g1, g2 = _trial_gains(cfg, stream, gains)
    if policy is PolicyKind.VIRTUAL:
        return run_virtual(cfg, g1, g2, record)
    return run_gs(cfg, g1, g2, L, record)


@dataclass(frozen=True)
class SweepRow:
    policy: PolicyKind
    L: int | None
    p_s_dbm: float
    rho: float
    estimate: OutageEstimate


def _sweep_task(args) -> SweepRow:
    policy, L, p_s_dbm, cfg = args
    point = cfg.replace(p_s=dbm_to_watts(p_s_dbm))
    stream = BlockStream.for_point(cfg.seed, p_s_dbm)
    res = run_trial(policy, point, stream, L=L)
    return SweepRow(PolicyKind(policy), L, p_s_dbm, cfg.rho, res.estimate)


def sweep_tasks(policies, p_s_grid, cfg: SystemConfig, levels=None):
    levels = [cfg.level_count_L] if not levels else list(levels)
    tasks = []
    for policy in policies:
        policy = PolicyKind(policy)
        for L in ([None] if policy is PolicyKind.VIRTUAL else levels):
            for p in p_s_grid:
                tasks.append((policy, L, float(p), cfg))
    return tasks


def run_sweep(policies, p_s_grid, cfg: SystemConfig, levels=None, workers: int = 1) -> list[SweepRow]:
    """One estimate per (policy, L preset, p_s), ordered by that nesting.

    Each point's stream depends only on the master seed and the p_s value,
    so results do not depend on ``workers`` or scheduling order. The
    virtual model ignores L and is run once per p_s.
    """
    if len(p_s_grid) == 0:
        raise ValueError("empty p_s grid")
    cfg = validate_config(cfg)
    tasks = sweep_tasks(policies, p_s_grid, cfg, levels)
    if workers is None or workers <= 0:
        workers = os.cpu_count() or 1
    log.info("running %d sweep tasks on %d worker(s)", len(tasks), workers)
    if workers == 1:
        return [_sweep_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_task, tasks))
