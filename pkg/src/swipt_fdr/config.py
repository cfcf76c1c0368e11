"""System configuration, unit conversions and validation.

All powers are stored in watts and all gains as linear ratios. Battery
energies are slot-normalized (energy divided by the half-block duration),
so they share the unit of the relay transmit power.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field


class ThresholdMode(str, enum.Enum):
    PAPER_LITERAL = "paper-literal"
    SELF_CONSISTENT = "self-consistent"


class SinrMode(str, enum.Enum):
    EXACT = "exact"
    MIN_APPROX = "min-approx"


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _require_finite(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x!r}")
    return x


def db_to_linear(x: float) -> float:
    return 10.0 ** (_require_finite(x, "dB value") / 10.0)


def linear_to_db(x: float) -> float:
    x = _require_finite(x, "linear value")
    if x <= 0.0:
        raise ValueError(f"linear value must be positive, got {x!r}")
    return 10.0 * math.log10(x)


def dbm_to_watts(x: float) -> float:
    return 10.0 ** ((_require_finite(x, "dBm value") - 30.0) / 10.0)


def watts_to_dbm(x: float) -> float:
    return linear_to_db(x) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """Physical and policy parameters for one operating point.

    ``battery_alpha`` and ``sigma_r2`` may be left as ``None``; validation
    fills them with the defaults ``alpha = m1 * theta1`` (equal to the
    source-relay path loss) and ``sigma_r2 = sigma_p2``.
    """

    p_s: float = 1.0
    eta: float = 0.3
    rho: float = 0.5
    gamma_th: float = 7.0
    sigma_a2: float = field(default_factory=lambda: dbm_to_watts(-100.0))
    sigma_p2: float = field(default_factory=lambda: dbm_to_watts(-90.0))
    sigma_d2: float = field(default_factory=lambda: dbm_to_watts(-90.0))
    sigma_r2: float | None = None
    exact_relay_noise: bool = False
    path_loss_1: float = 3.49e-4
    path_loss_2: float = 4.59e-6
    m1: float = 4.0
    m2: float = 2.0
    g_a: float = field(default_factory=lambda: db_to_linear(-10.0))
    g_b: float = field(default_factory=lambda: db_to_linear(-20.0))
    eps_min: float = field(default_factory=lambda: dbm_to_watts(-27.0))
    battery_alpha: float | None = None
    level_count_L: int = 100
    threshold_mode: ThresholdMode = ThresholdMode.SELF_CONSISTENT
    sinr_mode: SinrMode = SinrMode.EXACT
    gs_sinr_mode: SinrMode = SinrMode.MIN_APPROX
    initial_energy_level: int = 0
    n_blocks: int = 1_000_000
    warmup_blocks: int = 1_000
    seed: int = 20161

    @property
    def theta1(self) -> float:
        return self.path_loss_1 / self.m1

    @property
    def theta2(self) -> float:
        return self.path_loss_2 / self.m2

    @property
    def p_b(self) -> float:
        alpha = self.m1 * self.theta1 if self.battery_alpha is None else self.battery_alpha
        return alpha * self.p_s

    @property
    def self_energy_loop(self) -> float:
        """Loop gain eta*rho*g_a of the relay re-harvesting its own signal."""
        return self.eta * self.rho * self.g_a

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


def _errors(cfg: SystemConfig) -> list[str]:
    errs = []

    def finite(name):
        v = getattr(cfg, name)
        if v is None or not math.isfinite(v):
            errs.append(f"{name} not finite")
            return False
        return True

    if finite("eta") and not 0.0 < cfg.eta < 1.0:
        errs.append("eta out of range (0, 1)")
    if finite("rho") and not 0.0 <= cfg.rho <= 1.0:
        errs.append("rho out of range [0, 1]")
    if finite("gamma_th") and cfg.gamma_th <= 0.0:
        errs.append("gamma_th must be positive")
    for name in ("sigma_a2", "sigma_p2", "sigma_d2"):
        if finite(name) and getattr(cfg, name) <= 0.0:
            errs.append(f"{name} must be positive")
    if cfg.sigma_r2 is not None and finite("sigma_r2") and cfg.sigma_r2 <= 0.0:
        errs.append("sigma_r2 must be positive")
    for name in ("path_loss_1", "path_loss_2"):
        if finite(name) and getattr(cfg, name) <= 0.0:
            errs.append(f"{name} must be positive")
    for name in ("m1", "m2"):
        if finite(name) and getattr(cfg, name) < 0.5:
            errs.append(f"{name} must be >= 0.5")
    for name in ("g_a", "g_b", "eps_min"):
        if finite(name) and getattr(cfg, name) < 0.0:
            errs.append(f"{name} must be non-negative")
    if finite("p_s") and cfg.p_s <= 0.0:
        errs.append("p_s must be positive")
    if cfg.battery_alpha is not None and finite("battery_alpha") and cfg.battery_alpha <= 0.0:
        errs.append("battery_alpha must be positive")
    if not errs and cfg.self_energy_loop >= 1.0:
        errs.append("self-energy instability: eta*rho*g_a >= 1")
    if int(cfg.level_count_L) != cfg.level_count_L or cfg.level_count_L < 0:
        errs.append("level_count_L must be a non-negative integer")
    if int(cfg.initial_energy_level) != cfg.initial_energy_level or cfg.initial_energy_level < 0:
        errs.append("initial_energy_level must be a non-negative integer")
    elif cfg.initial_energy_level > cfg.level_count_L + 1:
        errs.append("initial_energy_level exceeds the top battery level")
    for name in ("n_blocks", "warmup_blocks", "seed"):
        v = getattr(cfg, name)
        if int(v) != v or v < 0:
            errs.append(f"{name} must be a non-negative integer")
    try:
        ThresholdMode(cfg.threshold_mode)
    except ValueError:
        errs.append(f"threshold_mode unknown: {cfg.threshold_mode!r}")
    for name in ("sinr_mode", "gs_sinr_mode"):
        try:
            SinrMode(getattr(cfg, name))
        except ValueError:
            errs.append(f"{name} unknown: {getattr(cfg, name)!r}")
    return errs


def validate_config(raw: SystemConfig) -> SystemConfig:
    """Check every invariant of ``raw`` and fill the derived fields.

    Raises :class:`ConfigError` listing all violations at once. Validating an
    already validated config returns an equal config.
    """
    errs = _errors(raw)
    if errs:
        raise ConfigError(errs)
    sigma_r2 = raw.sigma_r2
    if sigma_r2 is None:
        sigma_r2 = (1.0 - raw.rho) * raw.sigma_a2 + raw.sigma_p2 if raw.exact_relay_noise else raw.sigma_p2
    alpha = raw.m1 * raw.theta1 if raw.battery_alpha is None else raw.battery_alpha
    return dataclasses.replace(
        raw,
        sigma_r2=float(sigma_r2),
        battery_alpha=float(alpha),
        threshold_mode=ThresholdMode(raw.threshold_mode),
        sinr_mode=SinrMode(raw.sinr_mode),
        gs_sinr_mode=SinrMode(raw.gs_sinr_mode),
        level_count_L=int(raw.level_count_L),
        initial_energy_level=int(raw.initial_energy_level),
        n_blocks=int(raw.n_blocks),
        warmup_blocks=int(raw.warmup_blocks),
        seed=int(raw.seed),
    )
