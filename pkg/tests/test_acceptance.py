"""Acceptance suite: one verdict line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
are produced; they are also repeated in the terminal summary.
"""

import math

import numpy as np
import pytest

from conftest import VERDICTS
from handtrace import EXPECTED, GAINS, manual_trajectory, toy_config
from swipt_fdr import cli
from swipt_fdr.analysis import gamma_cdf_regularized, outage_virtual_quadrature
from swipt_fdr.channel import BlockStream, sample_blocks
from swipt_fdr.config import SinrMode, SystemConfig, ThresholdMode, dbm_to_watts, validate_config
from swipt_fdr.configfile import parse_grid
from swipt_fdr.energy import INFEASIBLE, EnergyGrid, Mode, quantize_harvest, required_level
from swipt_fdr.engine import run_sweep, run_trial
from swipt_fdr.policy import PolicyKind, c1_threshold

pytestmark = pytest.mark.slow

N = 1_000_000
GRID = parse_grid("0:46:2")
PRESETS = (4, 6, 8)
LOW_MID_MAX_DBM = 14.0
HIGH = tuple(p for p in GRID if p >= GRID[-1] - 6.0)


def verdict(key: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}"
    VERDICTS[key] = line
    print(line)
    assert ok, line


def separated_below(a, b) -> bool:
    """``a`` is below ``b`` with disjoint confidence intervals."""
    return a.ci_high < b.ci_low


def test_c1_oracle_equivalence():
    base = validate_config(SystemConfig(n_blocks=N, warmup_blocks=0))
    worst = 0.0
    bad = []
    grid = parse_grid("0:44:4")
    assert len(grid) == 12
    for mode in (SinrMode.EXACT, SinrMode.MIN_APPROX):
        cfg = base.replace(sinr_mode=mode)
        for p in grid:
            point = cfg.replace(p_s=dbm_to_watts(p))
            est = run_trial("virtual", point).estimate
            q = outage_virtual_quadrature(point)
            se = math.sqrt(q.outage * (1 - q.outage) / est.n_blocks + q.error_bound**2)
            diff = abs(est.p_outage - q.outage)
            z = diff / se if se > 0 else (0.0 if diff == 0 else math.inf)
            worst = max(worst, z)
            if z > 3.0:
                bad.append(f"{mode.value}@{p:g}dBm z={z:.2f}")
    verdict("1", not bad, f"12 points x 2 sinr modes, max |MC-quad|/SE = {worst:.2f} (limit 3) {' '.join(bad)}")


@pytest.fixture(scope="module")
def figure_sweep():
    cfg = validate_config(SystemConfig(n_blocks=N))
    rows = run_sweep(["virtual", "gs"], GRID, cfg, levels=PRESETS)
    virtual = {r.p_s_dbm: r.estimate for r in rows if r.policy is PolicyKind.VIRTUAL}
    gs = {(r.L, r.p_s_dbm): r.estimate for r in rows if r.policy is PolicyKind.GS}
    return virtual, gs


def test_c2a_gs_beats_virtual_low_mid(figure_sweep):
    virtual, gs = figure_sweep
    checked, ties, bad = 0, 0, []
    for p in (p for p in GRID if p <= LOW_MID_MAX_DBM):
        v = virtual[p]
        if v.p_outage <= 0.1:
            continue
        for L in PRESETS:
            g = gs[L, p]
            checked += 1
            # both pinned at certain outage: no ordering is measurable
            tie = g.p_outage == 1.0 and v.p_outage == 1.0
            ties += tie
            if not (tie or separated_below(g, v)):
                bad.append(f"L={L}@{p:g}dBm gs={g.p_outage:.4g} virtual={v.p_outage:.4g}")
    ok = checked > 0 and not bad
    verdict("2a", ok, (
        f"GS below virtual beyond CI at {checked - ties} of {checked} (L, p_s) points <= {LOW_MID_MAX_DBM:g} dBm, "
        f"{ties} with both outages exactly 1 {' '.join(bad)}"
    ))


def test_c2b_presets_coincide_low_mid(figure_sweep):
    _, gs = figure_sweep
    bad = []
    points = [p for p in GRID if p <= LOW_MID_MAX_DBM]
    for p in points:
        ests = [gs[L, p] for L in PRESETS]
        if max(e.ci_low for e in ests) > min(e.ci_high for e in ests):
            bad.append(f"{p:g}dBm " + "/".join(f"{e.p_outage:.4g}" for e in ests))
    verdict("2b", not bad, f"L={PRESETS} CIs overlap at all {len(points)} points <= {LOW_MID_MAX_DBM:g} dBm {' '.join(bad)}")


def test_c2c_larger_L_lower_at_high_power(figure_sweep):
    _, gs = figure_sweep
    bad = []
    for p in HIGH:
        for small, large in zip(PRESETS, PRESETS[1:]):
            if not separated_below(gs[large, p], gs[small, p]):
                bad.append(f"L{large}<L{small}@{p:g}dBm")
    floors = ", ".join(f"L={L}: {gs[L, HIGH[-1]].p_outage:.3g}" for L in PRESETS)
    verdict("2c", not bad, f"strict L ordering beyond CI over {HIGH[0]:g}-{HIGH[-1]:g} dBm ({floors}) {' '.join(bad)}")


def test_c2d_gs_floor_virtual_falls(figure_sweep):
    virtual, gs = figure_sweep
    lo, hi = HIGH[0], HIGH[-1]
    ratios = {L: gs[L, lo].p_outage / gs[L, hi].p_outage for L in PRESETS}
    floor_ok = all(r < 2.0 for r in ratios.values())
    falls = virtual[lo].ci_low > virtual[hi].ci_high
    detail = ", ".join(f"L={L} x{r:.3f}" for L, r in ratios.items())
    verdict(
        "2d",
        floor_ok and falls,
        f"GS drop {lo:g}->{hi:g} dBm: {detail} (limit x2); virtual {virtual[lo].p_outage:.2e} -> {virtual[hi].p_outage:.2e}",
    )


def test_c3_hand_trace():
    cfg = toy_config()
    res = run_trial("gs", cfg, gains=tuple(np.array(GAINS).T), record=True)
    tr = res.trace
    got = [
        (Mode(int(m)).label, float(h), float(q), float(e))
        for m, h, q, e in zip(tr.mode, tr.harvested, tr.required, tr.residual)
    ]
    diffs = [t for t, (a, b) in enumerate(zip(got, EXPECTED)) if a != b]
    ok = len(got) == 20 and not diffs and manual_trajectory(cfg) == EXPECTED
    verdict("3", ok, f"20-block GS trajectory vs hand computation, mismatched blocks: {diffs or 'none'}")


def test_c4_battery_invariants():
    rng = np.random.default_rng(4)
    steps = violations = 0
    trials = 10
    for _ in range(trials):
        cfg = validate_config(
            SystemConfig(
                p_s=dbm_to_watts(rng.uniform(0.0, 46.0)),
                rho=rng.uniform(0.05, 0.95),
                eta=rng.uniform(0.1, 0.9),
                n_blocks=N,
                warmup_blocks=0,
                seed=int(rng.integers(2**31)),
                threshold_mode=list(ThresholdMode)[rng.integers(2)],
            )
        )
        L = int(rng.choice([1, 4, 6, 8, 16, 100]))
        res = run_trial("gs", cfg, L=L, record=True)
        tr, grid = res.trace, res.grid
        e0 = tr.residual
        idx = np.rint(e0 * grid.top / grid.p_b).astype(np.int64)
        on_grid = (idx >= 0) & (idx <= grid.top) & (grid.level(idx) == e0)
        bounded = (e0 >= 0.0) & (e0 <= grid.p_b)
        before = np.concatenate(([grid.level(cfg.initial_energy_level)], e0[:-1]))
        tx = np.isin(tr.mode, [Mode.RELAY, Mode.HARVEST_RELAY])
        covered = ~tx | (np.isfinite(tr.required) & (tr.required <= before))
        violations += int(np.sum(~(on_grid & bounded & covered)))
        steps += e0.size
    ok = steps >= 10**7 and violations == 0
    verdict("4", ok, f"{steps} randomized GS steps over {trials} trials, {violations} violations")


QUANT_GRID = EnergyGrid(p_b=1.0, L_eff=3)
HARVEST_CASES = [
    (0.0, 0.0), (0.1, 0.0), (0.25, 0.0), (0.2500001, 0.25), (0.5, 0.25), (0.6, 0.5),
    (0.75, 0.5), (1.0, 0.75), (1.0000001, 1.0), (5.0, 1.0),
]
REQUIRED_CASES = [
    (1e-12, 0.25), (0.25, 0.25), (0.2500001, 0.5), (0.5, 0.5), (0.6, 0.75), (0.75, 0.75),
    (1.0, 1.0), (1.0000001, math.inf), (3.0, math.inf),
]


def test_c5_quantization_boundaries():
    bad = [("harvest", x) for x, want in HARVEST_CASES if quantize_harvest(x, QUANT_GRID) != want]
    bad += [("required", x) for x, want in REQUIRED_CASES if required_level(x, QUANT_GRID) != want]
    # boundaries on a grid whose levels are not exactly representable
    g = EnergyGrid(p_b=3.49e-4 * 1.3, L_eff=6)
    for i in range(1, g.top + 1):
        lv = g.level(i)
        if quantize_harvest(lv, g) != g.level(i - 1) or quantize_harvest(np.nextafter(lv, 2.0), g) != lv:
            bad.append(("harvest-edge", i))
        if required_level(lv, g) != lv or (i < g.top and required_level(np.nextafter(lv, 2.0), g) != g.level(i + 1)):
            bad.append(("required-edge", i))
    if g.required_index(np.nextafter(g.p_b, 2.0)) != INFEASIBLE:
        bad.append(("infeasible", g.p_b))
    total = len(HARVEST_CASES) + len(REQUIRED_CASES) + 4 * g.top + 1
    verdict("5", not bad, f"{total} strict/non-strict/cap/infeasible boundary cases, failures: {bad or 'none'}")


def ks_distance(x, cdf) -> float:
    x = np.sort(x)
    n = x.size
    f = np.array([cdf(v) for v in x])
    return float(max(np.max(np.arange(1, n + 1) / n - f), np.max(f - np.arange(n) / n)))


def test_c6_channel_statistics():
    cfg = validate_config(SystemConfig())
    g1, g2 = sample_blocks(BlockStream(cfg.seed), cfg, N)
    crit = 1.628 / math.sqrt(N)  # asymptotic KS critical value at the 1% level
    d1 = ks_distance(g1, lambda v: gamma_cdf_regularized(cfg.m1, v / cfg.theta1))
    d2 = ks_distance(g2, lambda v: gamma_cdf_regularized(cfg.m2, v / cfg.theta2))
    r1 = g1.mean() / 3.49e-4 - 1
    r2 = g2.mean() / 4.59e-6 - 1
    ok = abs(r1) < 0.01 and abs(r2) < 0.01 and d1 < crit and d2 < crit
    verdict("6", ok, f"mean error g1 {r1:+.4%}, g2 {r2:+.4%}; KS D = {d1:.2e}, {d2:.2e} (critical {crit:.2e})")


def test_c7_worker_determinism(tmp_path):
    args = ["--p-s-dbm", "0:46:6", "--n_blocks", "100000", "--levels", "4,6,8"]
    files = {}
    for workers in (1, 3):
        out = tmp_path / f"w{workers}"
        assert cli.main(["sweep", *args, "--workers", str(workers), "--out", str(out)]) == 0
        files[workers] = {
            name: (out / name).read_bytes() for name in ("sweep.csv", "sweep.svg")
        }
    same = files[1] == files[3]
    verdict("7", same, f"sweep.csv and sweep.svg byte-identical for 1 and 3 workers: {same}")


def gamma_r_mu_hr(g1, p_r, cfg):
    keep = 1 - cfg.rho
    return keep * cfg.p_s * g1 / (keep * p_r * cfg.g_b + cfg.sigma_r2)


def test_c8_c1_cross_check():
    rng = np.random.default_rng(8)
    n = 10_000
    worst = 0.0
    literal_passes = 0
    for _ in range(n):
        cfg = validate_config(
            SystemConfig(
                p_s=dbm_to_watts(rng.uniform(-10.0, 50.0)),
                rho=rng.uniform(0.01, 0.99),
                gamma_th=10 ** rng.uniform(-1, 2),
                g_b=10 ** rng.uniform(-6, 0),
                sigma_d2=10 ** rng.uniform(-14, -8),
                sigma_r2=10 ** rng.uniform(-14, -8),
            )
        )
        g2 = 10 ** rng.uniform(-9, 2)
        p_r = cfg.gamma_th * cfg.sigma_d2 / g2
        g1 = c1_threshold(g2, cfg, ThresholdMode.SELF_CONSISTENT) * cfg.sigma_r2 / cfg.p_s
        worst = max(worst, abs(gamma_r_mu_hr(g1, p_r, cfg) / cfg.gamma_th - 1))
        g1_lit = c1_threshold(g2, cfg, ThresholdMode.PAPER_LITERAL) * cfg.sigma_r2 / cfg.p_s
        literal_passes += abs(gamma_r_mu_hr(g1_lit, p_r, cfg) / cfg.gamma_th - 1) <= 1e-9
    unit = validate_config(SystemConfig(g_b=0.01))
    agree_at_one = c1_threshold(1.0, unit, ThresholdMode.PAPER_LITERAL) == c1_threshold(1.0, unit)
    ok = worst <= 1e-9 and literal_passes == 0 and agree_at_one
    verdict(
        "8",
        ok,
        f"{n} draws: self-consistent max rel error {worst:.1e} (limit 1e-9); "
        f"paper-literal satisfies identity in {literal_passes} draws (g2 != 1), equal at g2 = 1: {agree_at_one}",
    )
