"""Per-hop SINRs, end-to-end SINR and the outage rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SinrMode, SystemConfig

# Channel inversion meets the threshold exactly in real arithmetic; allow
# for the rounding of p_r * g2 / sigma_d2.
SINR_RTOL = 1e-12


@dataclass(frozen=True)
class SinrPair:
    gamma_r: float
    gamma_d: float


def first_hop_sinr(g1, p_r, rho_eff, cfg: SystemConfig):
    keep = 1.0 - rho_eff
    return keep * cfg.p_s * g1 / (keep * p_r * cfg.g_b + cfg.sigma_r2)


def second_hop_snr(g2, p_r, cfg: SystemConfig):
    return p_r * g2 / cfg.sigma_d2


def sinr_pair(g1: float, g2: float, p_r: float, rho_eff: float, cfg: SystemConfig) -> SinrPair:
    """SINRs of both hops; ``rho_eff`` is the share diverted to harvesting."""
    if p_r < 0:
        raise ValueError("p_r must be non-negative")
    return SinrPair(float(first_hop_sinr(g1, p_r, rho_eff, cfg)), float(second_hop_snr(g2, p_r, cfg)))


def e2e_sinr(gamma_r, gamma_d, mode: SinrMode = SinrMode.EXACT):
    """End-to-end SINR of the two-hop link. Elementwise on arrays."""
    if SinrMode(mode) is SinrMode.MIN_APPROX:
        return np.minimum(gamma_r, gamma_d)
    gamma_r = np.asarray(gamma_r, dtype=float)
    gamma_d = np.asarray(gamma_d, dtype=float)
    with np.errstate(invalid="ignore"):
        out = gamma_r * gamma_d / (gamma_r + gamma_d + 1.0)
    return float(out) if out.ndim == 0 else out


def decodes(e2e, gamma_th: float):
    return e2e >= gamma_th * (1.0 - SINR_RTOL)


def is_outage(transmitted: bool, pair: SinrPair, cfg: SystemConfig, mode: SinrMode | None = None) -> bool:
    """Outage iff the relay stayed silent or the destination cannot decode."""
    if not transmitted:
        return True
    mode = cfg.sinr_mode if mode is None else mode
    return not bool(decodes(e2e_sinr(pair.gamma_r, pair.gamma_d, mode), cfg.gamma_th))
