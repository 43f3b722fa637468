"""Block fading with in-block feedback: delayed-CSIT closed forms for the
two-state law, the delayed one-bit quantized-CSIT system for Rayleigh
fading, the pilot-plus-flash lower bound with quantized output feedback,
and the per-symbol block GMI / capacity upper bound.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .channel import UsageError
from .gmi import RateResult, gmi_adaptive_csir
from .numerics import (
    DEFAULT_QUAD,
    bisect_root,
    laguerre_nodes,
    mc_mean,
    wideband_metrics,
)
from .power import BUDGET_RTOL, _ray_tail_g_over, _ray_tail_log
from .specfun import bessel_i0_scaled, exp_scaled_e1, marcum_q1

LOG_PI_E = math.log(math.pi * math.e)


@dataclass(frozen=True)
class BlockSpec:
    """Block length L, CSIT delay D in symbols, feedback kind
    ("delayed_gain" or "output_quantized") with quantizer step delta, and
    the per-symbol power budget."""

    length: int
    delay: int
    feedback: str
    delta: float
    power: float

    def __post_init__(self):
        if self.length < 1 or not 0 <= self.delay <= self.length:
            raise UsageError("need L >= 1 and 0 <= D <= L")
        if self.feedback not in ("delayed_gain", "output_quantized"):
            raise UsageError(f"unknown feedback kind {self.feedback!r}")


def onoff_delayed_capacity(length, delay, p):
    """Two-state fading, CSIT delayed by D symbols inside each block.

    Returns (P_1, P_(D+1), RateResult, WidebandMetrics). The first D
    symbols use constant power P_1; the rest see H and concentrate power
    on the on state.
    """
    if not 0 <= delay <= length:
        raise UsageError("delay must lie in [0, L]")
    l, d = float(length), float(delay)

    def split(p):
        if d == l:
            return p, 0.0
        thresh = (l - d) / (4.0 * l)
        if p >= thresh:
            return p - thresh, 2.0 * p + d / (2.0 * l)
        return 0.0, 2.0 * l * p / (l - d)

    def rate(p):
        p1, pd = split(p)
        val = (d / (2.0 * l)) * math.log1p(2.0 * p1)
        if d < l:
            val += ((l - d) / (2.0 * l)) * math.log1p(2.0 * pd)
        return val

    p1, pd = split(p)
    wb = wideband_metrics(lambda x: rate(x) if x > 0 else 0.0, h=1e-5)
    return p1, pd, RateResult.make(rate(p), p), wb


def _e1_over(p):
    """e^(1/P) E1(1/P) = E[log(1 + G P)] for Rayleigh fading; 0 at P = 0."""
    if p <= 0.0:
        return 0.0
    return exp_scaled_e1(1.0 / p)


def rayleigh_delayed_quantized(length, delta, p, q=DEFAULT_QUAD):
    """Rayleigh block fading, CSIT delay D = L - 1, one-bit quantized gain
    fed back for the last symbol of each block.

    Solves the common-multiplier system over (P_1, P_L(low), P_L(high))
    and returns (lam, powers dict, RateResult).
    """
    if delta <= 0.0:
        raise UsageError("quantizer step must be positive")
    l = int(length)
    pr_lo = 1.0 - math.exp(-delta)
    pr_hi = math.exp(-delta)
    cap_all = 1.0  # E[G]
    cap_lo = (1.0 - (1.0 + delta) * math.exp(-delta)) / pr_lo  # E[G | G < delta]
    cap_hi = 1.0 + delta  # E[G | G >= delta]

    def mean_over(lo, hi, pw):
        v = _ray_tail_g_over(lo, pw)
        if math.isfinite(hi):
            v -= _ray_tail_g_over(hi, pw)
        return v

    def solve_power(lam, lo, hi, pr, cap):
        if lam >= cap:
            return 0.0
        f = lambda pw: mean_over(lo, hi, pw) / pr - lam
        return bisect_root(f, (1e-12, 20.0 / lam), tol=1e-13)

    def powers_for(lam):
        p1 = solve_power(lam, 0.0, math.inf, 1.0, cap_all) if l > 1 else 0.0
        p_lo = solve_power(lam, 0.0, delta, pr_lo, cap_lo)
        p_hi = solve_power(lam, delta, math.inf, pr_hi, cap_hi)
        return p1, p_lo, p_hi

    def budget(lam):
        p1, p_lo, p_hi = powers_for(lam)
        return (l - 1) * p1 + pr_lo * p_lo + pr_hi * p_hi

    lam = bisect_root(lambda x: budget(x) - l * p, (1e-9, cap_hi * 0.999999),
                      tol=l * p * BUDGET_RTOL * 1e-2)
    p1, p_lo, p_hi = powers_for(lam)
    total = (l - 1) * p1 + pr_lo * p_lo + pr_hi * p_hi
    if total > 0:
        scale = l * p / total
        p1, p_lo, p_hi = p1 * scale, p_lo * scale, p_hi * scale

    cap = (l - 1) / l * _e1_over(p1)
    cap += (_ray_tail_log_cell(0.0, delta, p_lo) + _ray_tail_log_cell(delta, math.inf, p_hi)) / l
    powers = {"p1": p1, "p_low": p_lo, "p_high": p_hi}
    return lam, powers, RateResult.make(cap, p)


def _ray_tail_log_cell(lo, hi, pw):
    if pw <= 0.0:
        return 0.0
    v = _ray_tail_log(lo, pw)
    if math.isfinite(hi):
        v -= _ray_tail_log(hi, pw)
    return v


def pilot_entropy_term(p1, q=DEFAULT_QUAD, n_gain=48):
    """E_G[h(Y_1 | H)] - log(pi e) for the constant-amplitude pilot
    X_1 = sqrt(P_1) e^(j Phi): the Rice-density output entropy averaged
    over the Rayleigh gain."""
    if p1 <= 0.0:
        return 0.0
    nodes, wts = laguerre_nodes(n_gain)

    def h_given_g(g):
        s = p1 * g  # noncentrality

        def neg_p_log_p(r):
            z = 2.0 * r * math.sqrt(s)
            logp = -math.log(math.pi) - (r * r + s) + z + math.log(bessel_i0_scaled(z))
            return -math.exp(logp) * logp * 2.0 * math.pi * r

        r_peak = math.sqrt(s)
        val, _ = integrate.quad(
            neg_p_log_p, 0.0, r_peak + 9.0, points=[max(r_peak - 4.0, 0.0), r_peak],
            epsabs=1e-11, epsrel=1e-9, limit=300,
        )
        return val

    ent = float(np.dot(wts, [h_given_g(g) for g in nodes]))
    return ent - LOG_PI_E


def rayleigh_output_feedback_rate(length, delta, p1, p2, q=DEFAULT_QUAD):
    """Achievable rate of the pilot-plus-flash scheme with one-bit
    quantized output feedback after the first symbol: transmit a constant
    amplitude pilot, then send CSCG bursts only if |Y_1| >= delta.

    The per-symbol budget is (P_1 + (L-1) P_2) / L.
    """
    l = int(length)
    if l < 2:
        raise UsageError("the feedback scheme needs L >= 2")
    pr_e = math.exp(-delta * delta / (p1 + 1.0))
    term1 = pilot_entropy_term(p1, q) / l

    nodes, wts = laguerre_nodes(max(q.n, 96))
    if pr_e > 0.0 and p2 > 0.0:
        b = math.sqrt(2.0) * delta
        vals = np.array(
            [
                marcum_q1(math.sqrt(2.0 * g * p1), b) * math.log1p(g * p2 / pr_e)
                for g in nodes
            ]
        )
        term2 = (l - 1) / l * float(np.dot(wts, vals))
    else:
        term2 = 0.0
    p_avg = (p1 + (l - 1) * p2) / l
    return RateResult.make(term1 + term2, p_avg)


def output_feedback_best(length, p, q=DEFAULT_QUAD, deltas=(0.25, 0.5, 1.0, 1.5, 2.0),
                         pilot_fractions=(0.02, 0.05, 0.1, 0.2, 0.4)):
    """Best pilot-plus-flash rate over a documented (delta, pilot power)
    grid at per-symbol budget p. Returns (RateResult, params dict)."""
    l = int(length)
    best = None
    for delta in deltas:
        for frac in pilot_fractions:
            p1 = frac * l * p
            p2 = (l * p - p1) / (l - 1)
            r = rayleigh_output_feedback_rate(l, delta, p1, p2, q)
            if best is None or r.nats > best[0].nats:
                best = (r, {"delta": delta, "p1": p1, "p2": p2})
    return best


def block_gmi_scalar(law, csis, policies, q=DEFAULT_QUAD):
    """Per-symbol averaged adaptive-symbol GMI for scalar block fading:
    each symbol ell has its own CSI spec and power policy; the block rate
    is the mean of the per-symbol rates (the fading is constant within
    the block and the per-symbol estimates decouple)."""
    if len(csis) != len(policies):
        raise UsageError("one CSI spec and one policy per symbol")
    total = 0.0
    p_total = 0.0
    for csi, pol in zip(csis, policies):
        r = gmi_adaptive_csir(law, csi, pol, q)
        total += r.nats
        p_total += r.p_avg
    l = len(csis)
    return RateResult.make(total / l, p_total / l)


def block_capacity_upper_bound(law, csis, policies, q=DEFAULT_QUAD, scenario=None,
                               mc=None):
    """Upper bound sum_ell E[log(1 + E[G P_ell | conditioning])] / L.

    For CSIT that is a function of the hidden state (no feedback), the
    conditioning keeps G exact and the bound is the Shannon-strategy
    capacity sum_ell E[log(1 + G P_ell(S_T))] / L. For the
    output-feedback scenario pass scenario=("output_feedback", delta,
    p1, p2, L); `mc=(n, seed)` estimates the feedback term by Monte
    Carlo instead of quadrature.
    """
    if scenario is None:
        total = 0.0
        p_total = 0.0
        for csi, pol in zip(csis, policies):
            full = gmi_adaptive_csir(
                law, _with_full_hp(csi), pol, q
            )
            total += full.nats
            p_total += full.p_avg
        l = len(csis)
        return RateResult.make(total / l, p_total / l)

    kind, delta, p1, p2, l = scenario
    if kind != "output_feedback":
        raise UsageError(f"unknown scenario {kind!r}")
    pr_e = math.exp(-delta * delta / (p1 + 1.0))
    first = _e1_over(p1) / l
    if mc is None:
        nodes, wts = laguerre_nodes(max(q.n, 96))
        b = math.sqrt(2.0) * delta
        vals = np.array(
            [marcum_q1(math.sqrt(2.0 * g * p1), b) * math.log1p(g * p2 / pr_e) for g in nodes]
        )
        second = (l - 1) / l * float(np.dot(wts, vals))
        unc = None
    else:
        n, seed = mc

        def sampler(m, rng):
            g = rng.exponential(1.0, m)
            y1 = np.sqrt(p1 * g) + (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * math.sqrt(0.5)
            fired = np.abs(y1) >= delta
            return np.where(fired, np.log1p(g * p2 / pr_e), 0.0)

        est = mc_mean(sampler, n, seed)
        second = (l - 1) / l * est.mean
        unc = est
    p_avg = (p1 + (l - 1) * p2) / l
    r = RateResult.make(first + second, p_avg)
    if unc is not None:
        r.uncertainty = unc
    return r


def _with_full_hp(csi):
    from .channel import Csir, CsiSpec

    return CsiSpec(csir=Csir("full_hp"), csit=csi.csit)
