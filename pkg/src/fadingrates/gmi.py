"""Generalized mutual information and mutual information computations.

Covers the forward AWGN auxiliary model with CSCG inputs, output-space
partitions (K subsets, each with its own Gaussian model), adaptive-symbol
GMIs with receiver side information, reverse-model rates built on
conditional second-order statistics, the per-output-point (large-K)
forward model, diagonal/product vector channels, and Monte Carlo mutual
information for the channels whose densities are available in closed form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import condstats
from .channel import UsageError, _csit_kernel, atom_gain, sample_flash
from .numerics import (
    DEFAULT_QUAD,
    LOG2,
    McEstimate,
    ebn0_of,
    integrate_exp_weighted,
    laguerre_nodes,
    mc_mean,
)
from .specfun import marcum_q1

SQRT2 = math.sqrt(2.0)

# count of variance/noise clamps applied instead of silently flushing
CLAMP_DIAGNOSTICS = {"sigma2": 0}
_SIGMA2_FLOOR = 1e-14


@dataclass
class RateResult:
    """A rate with its operating point: nats and bits per symbol, average
    power, Eb/N0 in dB, and the Monte Carlo uncertainty (zero half-width
    for closed forms)."""

    nats: float
    bits: float
    p_avg: float
    ebn0_db: float
    uncertainty: McEstimate = field(default_factory=McEstimate.exact)

    @staticmethod
    def make(nats, p_avg, uncertainty=None):
        nats = max(float(nats), 0.0)
        return RateResult(
            nats=nats,
            bits=nats / LOG2,
            p_avg=float(p_avg),
            ebn0_db=ebn0_of(p_avg, nats),
            uncertainty=uncertainty if uncertainty is not None else McEstimate.exact(),
        )


@dataclass(frozen=True)
class SecondOrderStats:
    """Channel second-order statistics that determine the K=1 forward GMI:
    E[Y X^*], E[|Y|^2] and the input power E[|X|^2]."""

    e_yx_conj: complex
    e_abs_y2: float
    e_abs_x2: float

    @property
    def h_tilde(self):
        return self.e_yx_conj / self.e_abs_x2

    @property
    def sigma2_tilde(self):
        s2 = self.e_abs_y2 - abs(self.h_tilde) ** 2 * self.e_abs_x2
        if s2 < _SIGMA2_FLOOR:
            CLAMP_DIAGNOSTICS["sigma2"] += 1
            return _SIGMA2_FLOOR
        return s2


def gmi_forward_cscg(stats):
    """Maximum K=1 forward-model GMI log(1 + |h~|^2 P / sigma~^2) for a
    CSCG input, with the LMMSE channel estimate h~ and error variance."""
    if stats.e_abs_x2 <= 0.0:
        raise ValueError("input power must be positive")
    snr = abs(stats.h_tilde) ** 2 * stats.e_abs_x2 / stats.sigma2_tilde
    return RateResult.make(math.log1p(snr), stats.e_abs_x2)


def gmi_gallager(stats, h, sigma2, s=1.0):
    """K=1 forward GMI in nats for arbitrary model parameters (h, sigma^2)
    and Gallager parameter s; depends on (sigma^2, s) only through their
    ratio. Can be negative for poor models."""
    v = sigma2 / s
    p = stats.e_abs_x2
    e_err2 = stats.e_abs_y2 - 2.0 * (h.conjugate() * stats.e_yx_conj).real + abs(h) ** 2 * p
    return (
        math.log1p(abs(h) ** 2 * p / v)
        + stats.e_abs_y2 / (v + abs(h) ** 2 * p)
        - e_err2 / v
    )


def gmi_gallager_matched_sigma(stats, h):
    """K=1 forward GMI with the model gain h fixed and the noise variance
    chosen optimally: log(E[|Y|^2] / E[|Y - h X|^2])."""
    p = stats.e_abs_x2
    e_err2 = stats.e_abs_y2 - 2.0 * (h.conjugate() * stats.e_yx_conj).real + abs(h) ** 2 * p
    if stats.e_abs_y2 <= e_err2:
        raise ValueError("model error dominates the output power; no positive rate")
    return math.log(stats.e_abs_y2 / e_err2)


@dataclass(frozen=True)
class AuxSubset:
    """One cell of an output-space partition: its probability, the
    conditional output moments, and the Gaussian model used on it."""

    prob: float
    e_abs_y2: float
    e_err2: float  # E[|Y - h_k Xbar|^2 | cell]
    h_k: complex
    sigma2_k: float


def gmi_k_partition(subsets, p_bar):
    """Partitioned forward GMI: sum over cells of
    prob * [log(1 + |h_k|^2 P / sigma_k^2) + E[|Y|^2|cell]/(sigma_k^2 +
    |h_k|^2 P) - E[|Y - h_k Xbar|^2|cell]/sigma_k^2]. Returns nats."""
    total_prob = sum(s.prob for s in subsets)
    if abs(total_prob - 1.0) > 1e-9:
        raise UsageError(f"subset probabilities sum to {total_prob}, not 1")
    val = 0.0
    for s in subsets:
        if s.prob == 0.0:
            continue
        if s.sigma2_k <= 0.0:
            raise UsageError("subset noise variance must be positive")
        hp = abs(s.h_k) ** 2 * p_bar
        val += s.prob * (
            math.log1p(hp / s.sigma2_k)
            + s.e_abs_y2 / (s.sigma2_k + hp)
            - s.e_err2 / s.sigma2_k
        )
    return val


def lmmse_subsets(cells, p_bar):
    """Turn raw per-cell moments (prob, E[|Y|^2], E[Y Xbar^*], E[|Xbar|^2])
    into AuxSubset records with the per-cell LMMSE parameters."""
    out = []
    for prob, e_y2, e_yx, e_x2 in cells:
        h_k = e_yx / e_x2
        e_err2 = e_y2 - abs(h_k) ** 2 * e_x2
        out.append(AuxSubset(prob, e_y2, e_err2 + 0.0, h_k, max(e_err2, _SIGMA2_FLOOR)))
    return out


# ---------------------------------------------------------------------------
# K = 2 closed-form subset moments for the capacity-scaling scenarios


def marcum_tail_energy(alpha, t_r, q=DEFAULT_QUAD):
    """J = int_0^inf e^-g g Q1(sqrt(alpha g), sqrt(alpha t_r)) dg: the
    joint noise-energy/threshold term of the high-output cell."""
    b = math.sqrt(alpha * t_r)
    x, w = laguerre_nodes(max(q.n, 96))
    vals = np.array([g * marcum_q1(math.sqrt(alpha * g), b) for g in x])
    return float(np.dot(w, vals))


def k2_subset_moments(scenario, p, t_r, *, t=None, eps=None, powers=None, q=DEFAULT_QUAD):
    """Conditional moments of the high-energy output cell E2 = {|Y|^2 >= t_r}
    for the four closed-form scenarios.

    Returns a dict with keys "prob", "e_abs_y2", "e_err2" (and per-branch
    entries for the two-sided CSIT-at-receiver case).
    """
    if scenario == "onoff_nocsi":
        # X ~ CN(0, P); on-state output variance 1 + 2P
        return _k2_two_state(0.5, 0.5, 2.0 * p, t_r, alpha=1.0 / p, q=q)
    if scenario == "onoff_fullcsit":
        # X(sqrt 2) ~ CN(0, 2P); on-state output variance 1 + 4P
        return _k2_two_state(0.5, 0.5, 4.0 * p, t_r, alpha=1.0 / (2.0 * p), q=q)
    if scenario == "onoff_csit_at_r":
        if eps is None or powers is None:
            raise UsageError("onoff_csit_at_r needs eps and powers=(P(0), P(sqrt2))")
        p0, p2 = powers
        out = {}
        for s_r, (w_off, w_on, pw) in {
            0.0: (1.0 - eps, eps, p0),
            SQRT2: (eps, 1.0 - eps, p2),
        }.items():
            out[s_r] = _k2_two_state(w_off, w_on, 2.0 * pw, t_r, alpha=1.0 / pw if pw > 0 else None, q=q)
        return out
    if scenario == "rayleigh_tci":
        if t is None:
            raise UsageError("rayleigh_tci needs the transmit threshold t")
        from .specfun import exp_scaled_e1

        p_hat = p / (math.exp(-t) * exp_scaled_e1(t)) if t > 0 else None
        if t == 0.0:
            p_hat = None
        if p_hat is None:
            raise UsageError("rayleigh_tci needs t > 0 so the inversion power is finite")
        w_on = math.exp(-t)
        return _k2_two_state(1.0 - w_on, w_on, p_hat, t_r, alpha=2.0 / p_hat, q=q)
    raise UsageError(f"unknown K=2 scenario {scenario!r}")


def _k2_two_state(w_off, w_on, q_on, t_r, alpha, q=DEFAULT_QUAD):
    """Cell moments when Y is CN(0,1) w.p. w_off and CN(0, 1+q_on) w.p. w_on,
    with the on-state signal h Xbar of variance q_on.

    alpha is the Marcum scaling 2/Var(h Xbar) of the tail-energy integral;
    None only when the on-state power is zero.
    """
    s_off = math.exp(-t_r)  # Pr{|Z|^2 >= t_r}
    s_on = math.exp(-t_r / (1.0 + q_on))
    prob = w_off * s_off + w_on * s_on
    e_y2 = (w_off * s_off * (t_r + 1.0) + w_on * s_on * (t_r + 1.0 + q_on)) / prob
    j = marcum_tail_energy(alpha, t_r, q) if alpha is not None else s_on * (t_r + 1.0)
    e_err2 = (w_off * s_off * (t_r + 1.0 + q_on) + w_on * j) / prob
    return {"prob": prob, "e_abs_y2": e_y2, "e_err2": e_err2}


def gmi_k2_rate(moments, q_on):
    """Assemble the K=2 GMI (nats) from the high-cell moments when the low
    cell uses the trivial zero-gain unit-noise model (its term vanishes);
    the high cell uses the matched gain so |h_2|^2 E[|Xbar|^2] = q_on."""
    return moments["prob"] * (
        math.log1p(q_on)
        + moments["e_abs_y2"] / (1.0 + q_on)
        - moments["e_err2"]
    )


# ---------------------------------------------------------------------------
# adaptive-symbol forward GMI with receiver side information


def _joint_atoms(law, csit):
    """Joint (prob, h, s_T) atoms for a discrete law under the CSIT map."""
    if not law.is_discrete:
        raise UsageError("no-CSIR forward GMI needs a discrete law or full CSIT")
    joint = []
    for h, p_h in law.atoms:
        for s_t, p_st in _csit_kernel(law, csit, atom_gain(h)):
            joint.append((p_h * p_st, h, s_t))
    return joint


def gmi_adaptive_csir(law, csi, policy, q=DEFAULT_QUAD, p_avg=None, breaks=()):
    """Forward-model GMI of an adaptive CSCG symbol with optimal phase
    compensation, averaged over the receiver side information.

    policy maps s_T to transmit power. Supported CSIR kinds: none,
    full_h, full_hp, indicator (with full CSIT), flip and lmmse (with
    CSIT = S_R). Returns a RateResult at the policy's average power.
    """
    csit, csir = csi.csit, csi.csir
    if p_avg is None:
        p_avg = average_power(law, csit, policy, q, csir=csir, breaks=breaks)

    if csir.kind == "full_hp":
        val = _expect_joint(law, csit, q, lambda g, s_t: math.log1p(g * policy(s_t)), breaks)
        return RateResult.make(val, p_avg)

    if csir.kind == "full_h":

        def snr_term(g):
            num = 0.0
            e_gp = 0.0
            for s_t, p_st in _csit_kernel(law, csit, g):
                num += p_st * math.sqrt(g * policy(s_t))
                e_gp += p_st * g * policy(s_t)
            denom = 1.0 + e_gp - num * num
            if denom <= 0.0:
                raise UsageError("estimated power exceeds output energy")
            return math.log1p(num * num / denom)

        val = _expect_gain_scalar(law, q, snr_term, (*breaks, *_csit_breaks(csit)))
        return RateResult.make(val, p_avg)

    if csir.kind == "none":
        if csit.kind == "full_h":
            # P~ = E[sqrt(G P(G))]^2 since conditioning on s_T = h fixes H
            num = _expect_gain_scalar(law, q, lambda g: math.sqrt(g * policy(g)), breaks)
            e_gp = _expect_gain_scalar(law, q, lambda g: g * policy(g), breaks)
            denom = 1.0 + e_gp - num * num
            return RateResult.make(math.log1p(num * num / denom), p_avg)
        joint = _joint_atoms(law, csit)
        # group by s_T: P~ = (sum_sT P(s_T) |E[H | s_T]| sqrt(P(s_T)))^2
        by_st = {}
        for prob, h, s_t in joint:
            acc = by_st.setdefault(s_t, [0.0, 0.0 + 0.0j, 0.0])
            acc[0] += prob
            acc[1] += prob * h
            acc[2] += prob * atom_gain(h) * policy(s_t)
        num = sum(abs(eh) * math.sqrt(policy(s_t)) for s_t, (p_st, eh, _) in by_st.items())
        e_gp = sum(acc[2] for acc in by_st.values())
        denom = 1.0 + e_gp - num * num
        if denom <= 0.0:
            raise UsageError("estimated power exceeds output energy")
        return RateResult.make(math.log1p(num * num / denom), p_avg)

    if csir.kind == "indicator":
        if csit.kind != "full_h":
            raise UsageError("indicator CSIR is supported with full CSIT")
        t = csir.t
        val = 0.0
        for branch, (lo, hi) in (("low", (0.0, t)), ("high", (t, math.inf))):
            pr = _gain_interval_prob(law, lo, hi)
            if pr <= 0.0:
                continue
            num = _expect_gain_interval(law, q, lambda g: np.sqrt(g * _pol_vec(policy, g)), lo, hi) / pr
            e_gp = _expect_gain_interval(law, q, lambda g: g * _pol_vec(policy, g), lo, hi) / pr
            denom = 1.0 + e_gp - num * num
            if denom <= 0.0:
                raise UsageError("estimated power exceeds output energy")
            val += pr * math.log1p(num * num / denom)
        return RateResult.make(val, p_avg)

    if csir.kind == "flip" and csit.kind == "equals_sr":
        if law.kind != "onoff":
            raise UsageError("flip CSIR is supported for the two-state law")
        eps = csir.eps
        val = 0.0
        for s_r in (0.0, SQRT2):
            g_tilde = abs((1.0 - eps) * s_r + eps * (SQRT2 - s_r)) ** 2
            e_g = (1.0 - eps) * abs(s_r) ** 2 + eps * (2.0 - abs(s_r) ** 2)
            pw = policy(abs(s_r) ** 2)
            denom = 1.0 + e_g * pw - g_tilde * pw
            val += 0.5 * math.log1p(g_tilde * pw / denom)
        return RateResult.make(val, p_avg)

    if csir.kind == "lmmse" and csit.kind == "equals_sr":
        eps = csir.eps
        # S_T = |S_R|^2 ~ Exp(1); gain estimate (1-eps) s_T, variance eps
        def term(s):
            pw = _pol_vec(policy, s)
            return np.log1p((1.0 - eps) * s * pw / (1.0 + eps * pw))

        val = integrate_exp_weighted(term, (0.0, np.inf), q)
        return RateResult.make(val, p_avg)

    raise UsageError(f"unsupported CSIR kind {csir.kind!r}")


def _pol_vec(policy, g):
    if np.isscalar(g):
        return policy(g)
    return np.array([policy(x) for x in np.atleast_1d(g)])


def average_power(law, csit, policy, q=DEFAULT_QUAD, csir=None, breaks=()):
    """E[P(S_T)] under the law and CSIT map; CSIT = S_R averages over the
    receiver's side-information distribution instead."""
    if csit.kind in ("equals_sr", "function_of_sr"):
        if csir is None:
            raise UsageError("CSIT = f(S_R) needs the CSIR spec to average the power")
        if csir.kind == "flip" and law.kind == "onoff":
            return 0.5 * (policy(0.0) + policy(2.0))
        if csir.kind == "lmmse":
            # S_T = |S_R|^2 ~ Exp(1)
            return integrate_exp_weighted(lambda s: _pol_vec(policy, s), (0.0, np.inf), q)
        raise UsageError(f"CSIT = f(S_R) unsupported for csir={csir.kind}")
    return _expect_joint(law, csit, q, lambda g, s_t: policy(s_t), breaks)


def _csit_breaks(csit):
    """Gain values where the CSIT kernel is discontinuous."""
    if csit.kind in ("quant_gain", "flip") and csit.bits not in (0, math.inf):
        return (csit.delta,)
    return ()


def _segments(breaks):
    pts = sorted({float(b) for b in breaks if 0.0 < b < math.inf})
    edges = [0.0, *pts, math.inf]
    return list(zip(edges[:-1], edges[1:]))


def _expect_joint(law, csit, q, f, breaks=()):
    """E[f(G, S_T)], splitting the gain integral at kernel discontinuities."""
    if law.is_discrete:
        total = 0.0
        for h, p_h in law.atoms:
            g = atom_gain(h)
            for s_t, p_st in _csit_kernel(law, csit, g):
                total += p_h * p_st * f(g, s_t)
        return total

    def inner(gs):
        return np.array(
            [sum(p_st * f(g, s_t) for s_t, p_st in _csit_kernel(law, csit, g)) for g in gs]
        )

    segs = _segments((*breaks, *_csit_breaks(csit)))
    return sum(integrate_exp_weighted(inner, seg, q) for seg in segs)


def _expect_gain_scalar(law, q, f, breaks=()):
    if law.is_discrete:
        return sum(p * f(atom_gain(h)) for h, p in law.atoms)
    inner = lambda gs: np.array([f(g) for g in gs])
    return sum(integrate_exp_weighted(inner, seg, q) for seg in _segments(breaks))


def _gain_interval_prob(law, lo, hi):
    if law.is_discrete:
        return sum(p for h, p in law.atoms if lo <= atom_gain(h) < hi)
    return math.exp(-lo) - (math.exp(-hi) if math.isfinite(hi) else 0.0)


def _expect_gain_interval(law, q, f, lo, hi):
    if law.is_discrete:
        return float(
            sum(p * np.asarray(f(np.array([atom_gain(h)])))[0] for h, p in law.atoms if lo <= atom_gain(h) < hi)
        )
    return integrate_exp_weighted(f, (lo, hi), q)


# ---------------------------------------------------------------------------
# reverse-model and large-K forward rates


def _mixture_for(law, csi, policy, q):
    """(weights, qs) of the output mixture Y ~ sum_i w_i CN(0, 1+q_i) seen
    without receiver side information, where q_i = G P(S_T)."""
    csit = csi.csit
    if law.is_discrete:
        comps = {}
        for h, p_h in law.atoms:
            g = atom_gain(h)
            for s_t, p_st in _csit_kernel(law, csit, g):
                key = round(g * policy(s_t), 14)
                comps[key] = comps.get(key, 0.0) + p_h * p_st
        items = sorted(comps.items())
        return np.array([w for _, w in items]), np.array([k for k, _ in items])
    if csit.kind == "full_h":
        # continuous gain; a TCI-style policy collapses to two components
        x, w = laguerre_nodes(max(q.n, 96))
        qs = np.array([g * policy(g) for g in x])
        return w.copy(), qs
    if csit.kind == "none":
        x, w = laguerre_nodes(max(q.n, 96))
        return w.copy(), x * policy(0.0)
    raise UsageError(f"no-CSIR mixture unsupported for csit={csit.kind}")


def gmi_reverse(law, csi, policy, q=DEFAULT_QUAD, p_avg=None, breaks=()):
    """Reverse-model rate E[-log Var(U | Y, S_R)] in nats, evaluated with
    the exact conditional second-order statistics of each scenario."""
    csir, csit = csi.csir, csi.csit
    if p_avg is None:
        p_avg = average_power(law, csit, policy, q, csir=csir, breaks=breaks)
    tol = max(q.tol, 1e-10)

    if csir.kind == "none":
        w, qs = _mixture_for(law, csi, policy, q)
        return RateResult.make(condstats.reverse_rate_mixture(w, qs, tol), p_avg)

    if csir.kind == "full_h":
        def per_gain(g):
            comps = [(p_st, g * policy(s_t)) for s_t, p_st in _csit_kernel(law, csit, g)]
            w = np.array([c[0] for c in comps])
            qs = np.array([c[1] for c in comps])
            if np.all(qs <= 1e-13):
                return 0.0
            if len(qs) == 1:
                return math.log1p(qs[0])  # capacity-achieving form
            return condstats.reverse_rate_mixture(w, qs, tol)

        val = _expect_gain_scalar(law, q, per_gain)
        return RateResult.make(val, p_avg)

    if csir.kind == "flip" and csit.kind == "equals_sr" and law.kind == "onoff":
        eps = csir.eps
        mixtures = []
        for s_r in (0.0, SQRT2):
            pw = policy(abs(s_r) ** 2)
            w = np.array([1.0 - eps, eps]) if s_r == 0.0 else np.array([eps, 1.0 - eps])
            qs = np.array([0.0, 2.0 * pw]) if s_r == 0.0 else np.array([0.0, 2.0 * pw])
            mixtures.append((w, qs))
        val = condstats.nested_reverse_rate([0.5, 0.5], mixtures, tol)
        return RateResult.make(val, p_avg)

    raise UsageError(f"reverse GMI unsupported for csir={csir.kind}")


def gmi_kinf_forward(law, csi, policy, q=DEFAULT_QUAD, p_avg=None, p_bar=None, breaks=()):
    """Per-output-point (large-K) forward-model GMI in nats; supported for
    scenarios without receiver side information."""
    if csi.csir.kind != "none":
        raise UsageError("large-K forward GMI implemented for trivial CSIR")
    if p_avg is None:
        p_avg = average_power(law, csi.csit, policy, q, csir=csi.csir)
    w, qs = _mixture_for(law, csi, policy, q)
    val = condstats.kinf_forward_rate_mixture(w, qs, p_bar if p_bar is not None else p_avg, max(q.tol, 1e-10))
    return RateResult.make(val, p_avg)


def caire_bound(law, p, q=DEFAULT_QUAD):
    """Capacity lower bound E[log(1 + G P)] - log(1 + Var(H) P), clamped
    at zero; tight only when the fading has small variance."""
    e_log = _expect_gain_scalar(law, q, lambda g: math.log1p(g * p))
    return RateResult.make(e_log - math.log1p(law.var_h() * p), p)


# ---------------------------------------------------------------------------
# vector / matrix forward models


def gmi_forward_matrix(e_yx, q_xbar, q_y):
    """Matrix forward-model GMI log det(Q_Y) - log det(Q_Y - H~ Q_Xbar H~^+)
    with the matrix LMMSE estimate H~ = E[Y Xbar^+] Q_Xbar^-1. Nats."""
    e_yx = np.asarray(e_yx, dtype=complex)
    q_xbar = np.asarray(q_xbar, dtype=complex)
    q_y = np.asarray(q_y, dtype=complex)
    h = e_yx @ np.linalg.inv(q_xbar)
    resid = q_y - h @ q_xbar @ h.conj().T
    sign1, logdet1 = np.linalg.slogdet(q_y)
    sign2, logdet2 = np.linalg.slogdet(resid)
    if sign1.real <= 0 or sign2.real <= 0:
        raise UsageError("covariances must be positive definite")
    return float(logdet1 - logdet2)


def gmi_mimo_product(per_dim, p_avg):
    """Diagonal/product-channel GMI: sum over dimensions of
    log(E[|Y_m|^2] / (E[|Y_m|^2] - E[|E[Y_m U_m(S_T)^*|S_T]|]^2)).

    per_dim is a list of (e_abs_y2, e_tilde) pairs where e_tilde is the
    CSIT-averaged magnitude of the conditional correlation.
    """
    val = 0.0
    for e_y2, e_tilde in per_dim:
        denom = e_y2 - e_tilde**2
        if denom <= 0.0:
            raise UsageError("correlation exceeds output energy")
        val += math.log(e_y2 / denom)
    return RateResult.make(val, p_avg)


# ---------------------------------------------------------------------------
# Monte Carlo mutual information


def _cscg_samples(n, rng):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)


def mi_mc_awgn(p, n, seed):
    """I(X;Y) for the unit-gain AWGN channel with CSCG input, by Monte
    Carlo over log p(y|x)/p(y); truth is log(1+P)."""

    def sampler(m, rng):
        x = math.sqrt(p) * _cscg_samples(m, rng)
        y = x + _cscg_samples(m, rng)
        log_num = -np.abs(y - x) ** 2
        log_den = -np.abs(y) ** 2 / (1.0 + p) - math.log1p(p)
        return log_num - log_den

    est = mc_mean(sampler, n, seed)
    return _rate_from_mc(est, p)


def _rate_from_mc(est, p_avg):
    return RateResult(
        nats=max(est.mean, 0.0),
        bits=max(est.mean, 0.0) / LOG2,
        p_avg=p_avg,
        ebn0_db=ebn0_of(p_avg, max(est.mean, 0.0)),
        uncertainty=est,
    )


def mi_mc_mixture(weights, qs, n, seed, p_avg):
    """I(S-branch input; Y) by Monte Carlo when, conditioned on component i
    (probability w_i), the channel is y = sqrt(q_i) u + z. Evaluates
    E[log p(y | u, all-branch) / p(y)] with the true mixture densities,
    which is the mutual information I(A; Y) of the adaptive symbol."""
    w = np.asarray(weights, dtype=float)
    q = np.asarray(qs, dtype=float)

    def sampler(m, rng):
        comp = rng.choice(len(w), size=m, p=w)
        u = _cscg_samples(m, rng)
        y = np.sqrt(q[comp]) * u + _cscg_samples(m, rng)
        # numerator: p(y | a) = sum_i w_i CN(y; sqrt(q_i) u, 1)
        num = np.zeros(m)
        den = np.zeros(m)
        for i, (wi, qi) in enumerate(zip(w, q)):
            num += wi * np.exp(-np.abs(y - math.sqrt(qi) * u) ** 2) / math.pi
            den += wi * np.exp(-np.abs(y) ** 2 / (1.0 + qi)) / (math.pi * (1.0 + qi))
        return np.log(num) - np.log(den)

    est = mc_mean(sampler, n, seed)
    return _rate_from_mc(est, p_avg)


def mi_mc_nocsi_gauss(law, p, n, seed, q=DEFAULT_QUAD):
    """I(X;Y) with CSCG input and no CSI, for the two-state or Rayleigh law."""
    if law.kind == "onoff":

        def sampler(m, rng):
            x = math.sqrt(p) * _cscg_samples(m, rng)
            on = rng.random(m) < 0.5
            y = np.where(on, SQRT2 * x, 0.0) + _cscg_samples(m, rng)
            num = 0.5 * np.exp(-np.abs(y) ** 2) / math.pi + 0.5 * np.exp(
                -np.abs(y - SQRT2 * x) ** 2
            ) / math.pi
            den = 0.5 * np.exp(-np.abs(y) ** 2) / math.pi + 0.5 * np.exp(
                -np.abs(y) ** 2 / (1.0 + 2.0 * p)
            ) / (math.pi * (1.0 + 2.0 * p))
            return np.log(num) - np.log(den)

        return _rate_from_mc(mc_mean(sampler, n, seed), p)
    if law.kind == "rayleigh":
        nodes, wts = laguerre_nodes(96)

        def sampler(m, rng):
            x = math.sqrt(p) * _cscg_samples(m, rng)
            h = _cscg_samples(m, rng)
            y = h * x + _cscg_samples(m, rng)
            ax2 = np.abs(x) ** 2
            ay2 = np.abs(y) ** 2
            num = np.exp(-ay2 / (ax2 + 1.0)) / (math.pi * (ax2 + 1.0))
            # p(y) = int e^-v CN(y; 0, 1 + v P) dv by Gauss-Laguerre
            vv = 1.0 + nodes[None, :] * p
            den = (np.exp(-ay2[:, None] / vv) / (math.pi * vv) * wts[None, :]).sum(axis=1)
            return np.log(num) - np.log(den)

        return _rate_from_mc(mc_mean(sampler, n, seed), p)
    raise UsageError(law.kind)


def mi_mc_nocsi_flash(law, p, p_flash, n, seed):
    """I(X;Y) with the flash input (mass 1-p_flash at zero, CSCG burst
    otherwise) and no CSI, for the two-state law."""
    if law.kind != "onoff":
        raise UsageError("flash Monte Carlo implemented for the two-state law")
    v = p / p_flash

    def sampler(m, rng):
        x = sample_flash(m, p_flash, p, rng)
        on = rng.random(m) < 0.5
        y = np.where(on, SQRT2 * x, 0.0) + _cscg_samples(m, rng)
        num = 0.5 * np.exp(-np.abs(y) ** 2) / math.pi + 0.5 * np.exp(
            -np.abs(y - SQRT2 * x) ** 2
        ) / math.pi
        ay2 = np.abs(y) ** 2
        den = (1.0 - 0.5 * p_flash) * np.exp(-ay2) / math.pi + 0.5 * p_flash * np.exp(
            -ay2 / (1.0 + 2.0 * v)
        ) / (math.pi * (1.0 + 2.0 * v))
        return np.log(num) - np.log(den)

    return _rate_from_mc(mc_mean(sampler, n, seed), p)


def mi_mc_onoff_fullcsir_partialcsit(eps, p0, p2, n, seed):
    """I(A;Y|H) for the two-state law with S_R = H and CSIT flipped with
    probability eps, fully-correlated CSCG codebook with powers (p0, p2)."""
    pw = np.array([p0, p2])

    def sampler(m, rng):
        on = rng.random(m) < 0.5  # H = sqrt 2 half the time
        flip = rng.random(m) < eps
        s_t = np.where(on ^ flip, 1, 0)  # index into pw: 1 means "gain on"
        u = _cscg_samples(m, rng)
        x = np.sqrt(pw[s_t]) * u
        y = np.where(on, SQRT2 * x, 0.0) + _cscg_samples(m, rng)
        # H = 0 contributes zero information; restrict to the on branch
        ay2 = np.abs(y) ** 2
        num = eps * np.exp(-np.abs(y - SQRT2 * np.sqrt(p0) * u) ** 2) / math.pi + (
            1.0 - eps
        ) * np.exp(-np.abs(y - SQRT2 * np.sqrt(p2) * u) ** 2) / math.pi
        den = eps * np.exp(-ay2 / (1.0 + 2.0 * p0)) / (math.pi * (1.0 + 2.0 * p0)) + (
            1.0 - eps
        ) * np.exp(-ay2 / (1.0 + 2.0 * p2)) / (math.pi * (1.0 + 2.0 * p2))
        vals = np.where(on, np.log(num) - np.log(den), 0.0)
        return vals

    est = mc_mean(sampler, n, seed)
    return _rate_from_mc(est, 0.5 * (p0 + p2))


def mi_mc_onoff_csit_at_r(eps, p0, p2, n, seed):
    """I(X;Y|S_R) for the two-state law with flipped CSIR and S_T = S_R."""
    pw = {0.0: p0, 2.0: p2}

    def sampler(m, rng):
        on = rng.random(m) < 0.5
        h = np.where(on, SQRT2, 0.0)
        flip = rng.random(m) < eps
        s_r = np.where(flip, SQRT2 - h, h)
        p_s = np.where(np.abs(s_r) > 1e-12, p2, p0)
        u = _cscg_samples(m, rng)
        x = np.sqrt(p_s) * u
        y = h * x + _cscg_samples(m, rng)
        ay2 = np.abs(y) ** 2
        # under s_R: H = s_r w.p. 1-eps, the other atom w.p. eps
        other = SQRT2 - s_r
        num = (1.0 - eps) * np.exp(-np.abs(y - s_r * x) ** 2) / math.pi + eps * np.exp(
            -np.abs(y - other * x) ** 2
        ) / math.pi
        den = (1.0 - eps) * np.exp(-ay2 / (1.0 + np.abs(s_r) ** 2 * p_s)) / (
            math.pi * (1.0 + np.abs(s_r) ** 2 * p_s)
        ) + eps * np.exp(-ay2 / (1.0 + np.abs(other) ** 2 * p_s)) / (
            math.pi * (1.0 + np.abs(other) ** 2 * p_s)
        )
        return np.log(num) - np.log(den)

    est = mc_mean(sampler, n, seed)
    return _rate_from_mc(est, 0.5 * (p0 + p2))


def mi_monte_carlo(law, csi, policy, p, n, seed, q=DEFAULT_QUAD, **kwargs):
    """Monte Carlo mutual information dispatcher keyed on the CSI spec."""
    csir, csit = csi.csir, csi.csit
    if csir.kind == "none" and csit.kind == "none":
        return mi_mc_nocsi_gauss(law, p, n, seed, q)
    if csir.kind == "full_h" and csit.kind == "flip" and law.kind == "onoff":
        return mi_mc_onoff_fullcsir_partialcsit(csit.eps, kwargs["p0"], kwargs["p2"], n, seed)
    if csir.kind == "flip" and csit.kind == "equals_sr" and law.kind == "onoff":
        return mi_mc_onoff_csit_at_r(csir.eps, kwargs["p0"], kwargs["p2"], n, seed)
    if csir.kind == "none" and csit.kind == "full_h":
        w, qs = _mixture_for(law, csi, policy, q)
        return mi_mc_mixture(w, qs, n, seed, p)
    raise UsageError(f"Monte Carlo MI unsupported for csir={csir.kind}, csit={csit.kind}")
