"""Semi-analytical outage of the virtual harvest-transmit model.

Conditioned on g1 the virtual relay's power is ``c * g1`` with
``c = eta*rho*p_s / (1 - eta*rho*g_a)``, so the block succeeds iff the
harvester is above sensitivity, the first hop clears the threshold and g2
exceeds a g1-dependent bound. Outage is therefore a one-dimensional
integral of the gamma CDF of g2 against the gamma density of g1, which is
evaluated here by adaptive Gauss-Kronrod quadrature. No random numbers are
involved, which makes this an independent check on the simulator.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .config import SinrMode, SystemConfig

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


class QuadratureError(ArithmeticError):
    """Adaptive integration did not reach its tolerance within budget."""


def _log_prefactor(a: float, x: float) -> float:
    return a * math.log(x) - x - math.lgamma(a)


def _series(a: float, x: float) -> float:
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _continued_fraction(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(_log_prefactor(a, x))
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def gamma_cdf_regularized(shape: float, x: float) -> float:
    """Regularized lower incomplete gamma P(shape, x)."""
    if shape <= 0:
        raise ValueError("shape must be positive")
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < shape + 1.0:
        return min(1.0, _series(shape, x))
    return max(0.0, 1.0 - _continued_fraction(shape, x))


def gamma_sf_regularized(shape: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(shape, x), accurate in the tail."""
    if shape <= 0:
        raise ValueError("shape must be positive")
    if x <= 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < shape + 1.0:
        return max(0.0, 1.0 - _series(shape, x))
    return min(1.0, _continued_fraction(shape, x))


def gamma_pdf(shape: float, x: float) -> float:
    """Density of the unit-scale gamma law."""
    if x <= 0.0:
        return 0.0 if shape > 1 else (math.inf if shape < 1 else 1.0)
    return math.exp((shape - 1.0) * math.log(x) - x - math.lgamma(shape))


def gamma_quantile_upper(shape: float, tail: float) -> float:
    """Smallest x (to bisection accuracy) with Q(shape, x) <= tail."""
    lo, hi = 0.0, max(1.0, shape)
    while gamma_sf_regularized(shape, hi) > tail:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gamma_sf_regularized(shape, mid) > tail:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15)
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    kronrod = fc * _WGK[7]
    gauss = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        s = f(center - dx) + f(center + dx)
        kronrod += _WGK[j] * s
        if j % 2 == 1:
            gauss += _WG[j // 2] * s
    return kronrod * half, abs((kronrod - gauss) * half)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 500
    initial_intervals: int = 1

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1 or self.initial_intervals < 1:
            raise ValueError("subdivision counts must be >= 1")


def adaptive_quad(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec()) -> tuple[float, float]:
    """Globally adaptive GK15 integration of ``f`` over [a, b].

    Returns ``(value, error_estimate)``. Raises :class:`QuadratureError` if
    the tolerance ``max(abs_tol, rel_tol*|value|)`` is not met after
    ``max_subdivisions`` interval evaluations.
    """
    if b <= a:
        return 0.0, 0.0
    k = spec.initial_intervals
    edges = [a + (b - a) * i / k for i in range(k)] + [b]
    heap = []
    total = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = _gk15(f, lo, hi)
        total += v
        err += e
        heapq.heappush(heap, (-e, lo, hi, v))
    evaluations = k
    while err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if evaluations >= spec.max_subdivisions:
            raise QuadratureError(
                f"tolerance not reached after {evaluations} subdivisions "
                f"(error estimate {err:.3e}, value {total:.6e})"
            )
        neg_e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total += v1 + v2 - v
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        evaluations += 2
    # re-sum to shed accumulated rounding from incremental updates
    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return total, err


@dataclass(frozen=True)
class VirtualOutage:
    outage: float
    error_bound: float


def outage_virtual_quadrature(
    cfg: SystemConfig, spec: QuadratureSpec = QuadratureSpec(), sinr_mode: SinrMode | None = None
) -> VirtualOutage:
    """Outage probability of the virtual model by 1-D quadrature over g1.

    ``cfg`` must be validated. ``sinr_mode`` defaults to ``cfg.sinr_mode``.
    """
    mode = SinrMode(cfg.sinr_mode if sinr_mode is None else sinr_mode)
    loop = cfg.self_energy_loop
    if loop >= 1.0:
        raise ValueError("self-energy instability: eta*rho*g_a >= 1")
    c = cfg.eta * cfg.rho * cfg.p_s / (1.0 - loop)
    if c <= 0.0:
        return VirtualOutage(1.0, 0.0)
    keep = 1.0 - cfg.rho

    # sensitivity gate on the harvester input rho*(p_s + c*g_a)*g1
    g_gate = cfg.eps_min / (cfg.rho * (cfg.p_s + c * cfg.g_a))
    # gamma_r(g1) = keep*p_s*g1 / (keep*c*g_b*g1 + sigma_r2) is increasing and
    # saturates at p_s / (c*g_b); above-threshold region is g1 >= g_hop
    slope = keep * cfg.p_s - cfg.gamma_th * keep * c * cfg.g_b
    if slope <= 0.0:
        return VirtualOutage(1.0, 0.0)
    g_hop = cfg.gamma_th * cfg.sigma_r2 / slope
    g_lo = max(g_gate, g_hop)

    th1, th2, m1, m2 = cfg.theta1, cfg.theta2, cfg.m1, cfg.m2
    u_lo = g_lo / th1
    tail = min(1e-13, 1e-3 * spec.abs_tol)
    u_hi = max(u_lo, gamma_quantile_upper(m1, tail))
    tail_mass = gamma_sf_regularized(m1, u_hi)
    base = gamma_cdf_regularized(m1, u_lo)

    def g2_bound(g1: float) -> float:
        inv = cfg.gamma_th * cfg.sigma_d2 / (c * g1)
        if mode is SinrMode.MIN_APPROX:
            return inv
        gr = keep * cfg.p_s * g1 / (keep * c * cfg.g_b * g1 + cfg.sigma_r2)
        if gr <= cfg.gamma_th:
            return math.inf
        return inv * (gr + 1.0) / (gr - cfg.gamma_th)

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        return gamma_pdf(m1, u) * gamma_cdf_regularized(m2, g2_bound(u * th1) / th2)

    value, err = adaptive_quad(integrand, u_lo, u_hi, spec)
    outage = min(1.0, base + value)
    return VirtualOutage(outage, err + tail_mass)
