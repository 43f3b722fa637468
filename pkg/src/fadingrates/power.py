"""Power-control policies and their optimizers.

Waterfilling over the gain, the one-bit quantized-CSIT Lagrangian system
(noiseless and noisy), quadratic waterfilling under channel-estimate
uncertainty, the truncated heuristics (constant power, matched filter,
channel inversion), the truncated-MMSE family, the GMI-optimal fixed
point, and the two-point partial-CSIT closed forms.

Every returned policy satisfies E[P(S_T)] = P to the calibration
tolerance of 1e-8 relative.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import FadingLaw, UsageError, atom_gain
from .gmi import RateResult
from .numerics import (
    DEFAULT_QUAD,
    LOG2,
    WidebandMetrics,
    bisect_root,
    ebn0_of,
    integrate_exp_weighted,
    wideband_metrics,
)
from .specfun import exp_integral_e1, exp_scaled_e1, gamma_upper

BUDGET_RTOL = 1e-8


@dataclass
class PowerPolicy:
    """A transmit-power map s_T -> P(s_T) with its average power."""

    kind: str
    fn: object  # callable s_T -> power
    budget: float
    params: dict = field(default_factory=dict)

    def __call__(self, s_t):
        return self.fn(s_t)


# ---------------------------------------------------------------------------
# closed-form Rayleigh building blocks


def _ray_tail_log(x, p):
    """int_x^inf e^-g log(1 + g p) dg."""
    if p <= 0.0:
        return 0.0
    return math.exp(-x) * (exp_scaled_e1(1.0 / p + x) + math.log1p(p * x))


def _ray_tail_g_over(x, p):
    """int_x^inf e^-g g/(1 + g p) dg."""
    if p == 0.0:
        return (1.0 + x) * math.exp(-x)
    y = 1.0 / p
    # t/(1+tp) = (1/p) t/(t+y)
    return math.exp(-x) * (1.0 - y * exp_scaled_e1(x + y)) / p


def _gain_tail_log(law, x, p, q):
    if law.kind == "rayleigh":
        return _ray_tail_log(x, p)
    return sum(pr * math.log1p(atom_gain(h) * p) for h, pr in law.atoms if atom_gain(h) >= x)


def _gain_cell_mean_over(law, lo, hi, p, q):
    """int over the gain cell [lo, hi) of p(g) g/(1+gp) dg."""
    if law.kind == "rayleigh":
        upper = _ray_tail_g_over(lo, p)
        if math.isfinite(hi):
            upper -= _ray_tail_g_over(hi, p)
        return upper
    return sum(
        pr * atom_gain(h) / (1.0 + atom_gain(h) * p)
        for h, pr in law.atoms
        if lo <= atom_gain(h) < hi
    )


def _gain_cell_prob(law, lo, hi):
    if law.kind == "rayleigh":
        return math.exp(-lo) - (math.exp(-hi) if math.isfinite(hi) else 0.0)
    return sum(pr for h, pr in law.atoms if lo <= atom_gain(h) < hi)


# ---------------------------------------------------------------------------
# waterfilling


def waterfill(law, p, q=DEFAULT_QUAD):
    """Waterfilling P(g) = (1/lam - 1/g)^+ against the budget E[P(G)] = p.

    Returns (lam, PowerPolicy, RateResult) with the ergodic capacity
    E[log(1 + G P(G))] = E[log(G/lam); G >= lam].
    """
    if p <= 0.0:
        raise UsageError("power budget must be positive")

    if law.kind == "rayleigh":
        budget = lambda lam: math.exp(-lam) / lam - exp_integral_e1(lam)
    else:
        gains = [(atom_gain(h), pr) for h, pr in law.atoms]

        def budget(lam):
            return sum(pr * max(1.0 / lam - 1.0 / g, 0.0) for g, pr in gains if g > 0)

    lam = bisect_root(lambda x: budget(x) - p, (1e-8, 10.0), tol=p * BUDGET_RTOL * 1e-2)
    if law.kind == "rayleigh":
        cap = exp_integral_e1(lam)
    else:
        cap = sum(pr * math.log(g / lam) for g, pr in gains if g > lam)

    policy = PowerPolicy(
        "waterfill", lambda g, lam=lam: max(1.0 / lam - 1.0 / g, 0.0) if g > 0 else 0.0, p,
        {"lam": lam},
    )
    return lam, policy, RateResult.make(cap, p)


def quantized_csit_powers(law, delta, p, eps=0.0, q=DEFAULT_QUAD):
    """One-bit quantized CSIT (optionally flipped with probability eps):
    per-cell powers solving the Lagrangian system, plus the capacity
    E[log(1 + G P(S_T))].

    Returns (lam, PowerPolicy mapping the CSIT bit in {0, 1}, RateResult).
    """
    if delta <= 0.0:
        raise UsageError("quantizer step must be positive")
    eb = 1.0 - eps
    # joint weights of (cell of G, CSIT bit): bit = cell xor flip
    cells = ((0.0, delta), (delta, math.inf))
    weight = {
        (c, b): _gain_cell_prob(law, *cells[c]) * (eb if b == c else eps)
        for c in (0, 1)
        for b in (0, 1)
    }
    p_st = {b: weight[(0, b)] + weight[(1, b)] for b in (0, 1)}

    def mean_gain_over(b, power):
        # int p(g, bit=b) g/(1+g power) dg
        total = 0.0
        for c in (0, 1):
            w = eb if b == c else eps
            if w > 0.0:
                total += w * _gain_cell_mean_over(law, *cells[c], power, q)
        return total

    caps = {b: mean_gain_over(b, 0.0) / p_st[b] if p_st[b] > 0 else 0.0 for b in (0, 1)}

    def powers_for(lam):
        out = {}
        for b in (0, 1):
            if p_st[b] <= 0.0 or lam >= caps[b]:
                out[b] = 0.0
                continue
            f = lambda pw: mean_gain_over(b, pw) / p_st[b] - lam
            out[b] = bisect_root(f, (1e-12, 10.0 / lam), tol=1e-12)
        return out

    def budget(lam):
        pw = powers_for(lam)
        return sum(p_st[b] * pw[b] for b in (0, 1))

    lam = bisect_root(lambda x: budget(x) - p, (1e-9, max(caps.values()) * 0.999999),
                      tol=p * BUDGET_RTOL * 1e-2)
    pw = powers_for(lam)
    # renormalize the residual bisection slack onto the active cells
    total = sum(p_st[b] * pw[b] for b in (0, 1))
    if total > 0.0:
        scale = p / total
        pw = {b: v * scale for b, v in pw.items()}

    cap = 0.0
    for c in (0, 1):
        for b in (0, 1):
            w = weight[(c, b)]
            if w > 0.0 and pw[b] > 0.0:
                cap += (
                    _gain_tail_log(law, cells[c][0], pw[b], q)
                    - (_gain_tail_log(law, cells[c][1], pw[b], q) if math.isfinite(cells[c][1]) else 0.0)
                ) * (w / _gain_cell_prob(law, *cells[c]))

    policy = PowerPolicy(
        "quantized-csit", lambda bit, pw=pw: pw[1] if bit >= 0.5 else pw[0], p,
        {"lam": lam, "delta": delta, "eps": eps, "powers": dict(pw)},
    )
    return lam, policy, RateResult.make(cap, p)


# ---------------------------------------------------------------------------
# quadratic waterfilling (channel-estimate uncertainty)


def quad_waterfill_level(lam, g_tilde, sigma_tilde2):
    """Power level of the quadratic waterfilling solution for one CSIT
    value with gain estimate g_tilde and estimation variance sigma_tilde2;
    sigma_tilde2 = 0 reproduces conventional waterfilling exactly."""
    if g_tilde <= 0.0:
        return 0.0
    head = max(1.0 / lam - 1.0 / g_tilde, 0.0)
    if sigma_tilde2 == 0.0:
        return head
    if head == 0.0:
        return 0.0
    a = g_tilde + 2.0 * sigma_tilde2
    b = g_tilde + sigma_tilde2
    x = 4.0 * sigma_tilde2 * head * g_tilde * b / (a * a)
    # sqrt(1+x)-1 written cancellation-free so sigma~^2 -> 0 is continuous
    return a / (2.0 * sigma_tilde2 * b) * (x / (math.sqrt(1.0 + x) + 1.0))


def quad_waterfill(cells, p, q=DEFAULT_QUAD):
    """Quadratic waterfilling over discrete CSIT values.

    cells: list of (weight, g_tilde, sigma_tilde2) per CSIT value. Returns
    (lam, PowerPolicy indexed by cell number, RateResult) with the rate
    sum_s w_s log(1 + g~ P / (1 + sigma~^2 P)).
    """

    def budget(lam):
        return sum(w * quad_waterfill_level(lam, g, s2) for w, g, s2 in cells)

    g_max = max(g for _, g, _ in cells if g > 0)
    lam = bisect_root(lambda x: budget(x) - p, (1e-9, g_max * 0.999999), tol=p * BUDGET_RTOL * 1e-2)
    levels = [quad_waterfill_level(lam, g, s2) for _, g, s2 in cells]
    total = sum(w * lv for (w, _, _), lv in zip(cells, levels))
    if total > 0.0:
        levels = [lv * p / total for lv in levels]
    rate = sum(
        w * math.log1p(g * lv / (1.0 + s2 * lv)) for (w, g, s2), lv in zip(cells, levels)
    )
    policy = PowerPolicy(
        "quad-waterfill", lambda idx, lv=levels: lv[int(idx)], p, {"lam": lam, "levels": levels}
    )
    return lam, policy, RateResult.make(rate, p)


def quad_waterfill_rayleigh_lmmse(eps, p, q=DEFAULT_QUAD):
    """Quadratic waterfilling for Rayleigh fading with an LMMSE channel
    estimate at the receiver and CSIT S_T = |S_R|^2 ~ Exp(1): gain
    estimate (1 - eps) s and variance eps per CSIT value s.

    Returns (lam, PowerPolicy over s, RateResult).
    """
    eb = 1.0 - eps

    def level(lam, s):
        return quad_waterfill_level(lam, eb * s, eps)

    def budget(lam):
        lo = lam / eb  # P(s) > 0 iff g~ = (1-eps) s > lam
        return integrate_exp_weighted(
            lambda ss: np.array([level(lam, x) for x in ss]), (lo, np.inf), q
        )

    lam = bisect_root(lambda x: budget(x) - p, (1e-9, 20.0), tol=p * BUDGET_RTOL * 1e-2)

    def rate_fn(lam):
        lo = lam / eb

        def f(ss):
            out = np.empty_like(ss)
            for i, s in enumerate(ss):
                lv = level(lam, s)
                out[i] = math.log1p(eb * s * lv / (1.0 + eps * lv))
            return out

        return integrate_exp_weighted(f, (lo, np.inf), q)

    rate = rate_fn(lam)
    policy = PowerPolicy(
        "quad-waterfill-lmmse", lambda s, lam=lam: level(lam, s), p, {"lam": lam, "eps": eps}
    )
    return lam, policy, RateResult.make(rate, p)


# ---------------------------------------------------------------------------
# truncated heuristics (TCP / TMF / TCI) with full CSIT


def _heuristic_moments(law, a, t, q):
    """(E[G^a; G>=t], E[G^(1+a)/2 ... sqrt moment], E[G^(1+a); G>=t])."""
    if law.kind == "rayleigh":
        norm = gamma_upper(1.0 + a, t) if a > -1.0 else (exp_integral_e1(t) if t > 0 else math.inf)
        m_half = gamma_upper(0.5 * (3.0 + a), t)
        m_one = gamma_upper(2.0 + a, t)
        return norm, m_half, m_one
    norm = m_half = m_one = 0.0
    for h, pr in law.atoms:
        g = atom_gain(h)
        if g < t or g == 0.0:
            if g == 0.0 and t <= 0.0 and a < 0:
                raise UsageError("channel inversion undefined at zero gain")
            continue
        norm += pr * g**a
        m_half += pr * g ** (0.5 * (1.0 + a))
        m_one += pr * g ** (1.0 + a)
    return norm, m_half, m_one


def heuristic_policy(law, a, t, p, q=DEFAULT_QUAD, csir="none"):
    """Truncated power-law policy P(h) = P_hat g^a for g >= t (a = 0: TCP,
    a = 1: TMF, a = -1: TCI) with full CSIT.

    csir is "none" (S_R = 0) or "indicator" (S_R = 1(G >= t)). Returns
    (PowerPolicy over the gain, RateResult of the K=1 forward GMI,
    WidebandMetrics of the policy family at this threshold).
    """
    if a not in (-1, 0, 1):
        raise UsageError("exponent a must be -1, 0 or +1")
    if csir not in ("none", "indicator"):
        raise UsageError(f"unsupported CSIR {csir!r}")
    norm, m_half, m_one = _heuristic_moments(law, a, t, q)
    if not 0.0 < norm < math.inf:
        raise UsageError("normalizing moment is degenerate; adjust the threshold")
    p_hat = p / norm
    pr_on = law.gain_survival(t) if t > 0 else 1.0

    if csir == "none":
        num = p_hat * m_half**2
        den = 1.0 + p_hat * (m_one - m_half**2)
        rate = math.log1p(num / den)
        ebn0_min = norm / m_half**2 * LOG2
    else:
        c_half = m_half / pr_on
        c_one = m_one / pr_on
        num = p_hat * c_half**2
        den = 1.0 + p_hat * (c_one - c_half**2)
        rate = pr_on * math.log1p(num / den)
        ebn0_min = (norm / pr_on) / c_half**2 * LOG2

    def rate_at(pp):
        if pp <= 0.0:
            return 0.0
        ph = pp / norm
        if csir == "none":
            return math.log1p(ph * m_half**2 / (1.0 + ph * (m_one - m_half**2)))
        return pr_on * math.log1p(ph * c_half**2 / (1.0 + ph * (c_one - c_half**2)))

    wb = wideband_metrics(rate_at, h=1e-5)
    wb = WidebandMetrics(10.0 * math.log10(ebn0_min), wb.slope_s, wb.cdot0, wb.cddot0)

    policy = PowerPolicy(
        f"heuristic(a={a})",
        lambda g, ph=p_hat, a=a, t=t: ph * g**a if g >= t and g > 0 else 0.0,
        p,
        {"a": a, "t": t, "p_hat": p_hat},
    )
    return policy, RateResult.make(rate, p), wb


def tci_threshold_root():
    """Threshold minimizing the no-CSIR channel-inversion Eb/N0:
    the root of 2 t e^t E1(t) = 1."""
    return bisect_root(lambda t: 2.0 * t * exp_scaled_e1(t) - 1.0, (0.1, 2.0), tol=1e-12)


def tcp_csir_saturation(t):
    """High-power limit (nats) of the truncated-constant-power rate with
    S_R = 1(G >= t), for Rayleigh fading."""
    g32 = gamma_upper(1.5, t)
    denom = (t + 1.0) - math.exp(2.0 * t) * g32**2
    if denom <= 0.0:
        return math.inf
    return math.exp(-t) * math.log((t + 1.0) / denom)


# ---------------------------------------------------------------------------
# truncated MMSE family


def _tmmse_integrals(beta, t):
    """Rayleigh integrals of the MMSE-shaped policy sqrt(P) = alpha sqrt(g)
    / (beta + g) on g >= t, per unit alpha^2:
    (budget E[g/(beta+g)^2], sqrt-moment E[g/(beta+g)], energy E[g^2/(beta+g)^2])."""
    e1s = exp_scaled_e1(t + beta)
    emt = math.exp(-t)
    i_budget = emt * ((beta + 1.0) * e1s - beta / (t + beta))
    i_sqrt = emt * (1.0 - beta * e1s)
    i_energy = emt * (1.0 + beta * beta / (t + beta) - beta * (beta + 2.0) * e1s)
    return i_budget, i_sqrt, i_energy


def tmmse_rate(law, beta, t, p, csir):
    """K=1 forward GMI of the MMSE-shaped truncated policy at (beta, t)."""
    if law.kind != "rayleigh":
        raise UsageError("the truncated-MMSE closed forms are for Rayleigh fading")
    i_budget, i_sqrt, i_energy = _tmmse_integrals(beta, t)
    if i_budget <= 0.0:
        return 0.0
    alpha2 = p / i_budget
    if csir == "none":
        p_tilde = alpha2 * i_sqrt**2
        e_y2 = 1.0 + alpha2 * i_energy
        return math.log1p(p_tilde / (e_y2 - p_tilde))
    pr_on = math.exp(-t)
    sqrt_pt = math.sqrt(alpha2) * i_sqrt / pr_on
    e_y2 = 1.0 + alpha2 * i_energy / pr_on
    p_tilde = sqrt_pt**2
    return pr_on * math.log1p(p_tilde / (e_y2 - p_tilde))


def tmmse_optimize(law, p, q=DEFAULT_QUAD, csir="none", t=0.0, n_grid=32):
    """Best MMSE-shaped truncated policy sqrt(P(h)) = alpha |h|/(beta+g)
    for g >= t: coarse log-grid over beta then golden-section refinement.

    With csir="none" the threshold is t = 0 (that policy is GMI-optimal);
    with csir="indicator" the receiver sees 1(G >= t) for the given t.
    Returns (PowerPolicy, RateResult).
    """
    if csir == "none":
        t = 0.0
    betas = np.logspace(-6, 4, n_grid)
    vals = [tmmse_rate(law, b, t, p, csir) for b in betas]
    k = int(np.argmax(vals))
    lo = betas[max(k - 1, 0)]
    hi = betas[min(k + 1, n_grid - 1)]
    beta = _golden_max(lambda b: tmmse_rate(law, b, t, p, csir), lo, hi)
    rate = tmmse_rate(law, beta, t, p, csir)
    i_budget, _, _ = _tmmse_integrals(beta, t)
    alpha2 = p / i_budget
    policy = PowerPolicy(
        "tmmse",
        lambda g, a2=alpha2, b=beta, t=t: a2 * g / (b + g) ** 2 if g >= t else 0.0,
        p,
        {"alpha2": alpha2, "beta": beta, "t": t},
    )
    return policy, RateResult.make(rate, p)


def _golden_max(f, lo, hi, tol=1e-10, max_iter=200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(math.exp(d))
    return math.exp(0.5 * (a + b))


# ---------------------------------------------------------------------------
# GMI-optimal fixed point (Rayleigh, S_R = 0 or S_R = 1(G >= t))


def optimal_policy_fixed_point(law, p, q=DEFAULT_QUAD, csir="none", t=0.0,
                               damping=0.5, max_iter=400, tol=1e-8):
    """Fixed-point iteration for the GMI-optimal full-CSIT policy
    sqrt(P(h)) = alpha(s_R) |h| / (lam + beta(s_R) g).

    The per-branch coefficients are alpha = sqrt(P~)/(E[|Y|^2]-P~) and
    beta = P~/((E[|Y|^2]-P~) E[|Y|^2]); lam meets the budget. Returns
    (PowerPolicy, RateResult, diagnostics dict).
    """
    if law.kind != "rayleigh":
        raise UsageError("fixed-point optimizer implemented for Rayleigh fading")
    if csir == "none":
        t = 0.0
    branches = [(0.0, t), (t, math.inf)] if csir == "indicator" and t > 0 else [(0.0, math.inf)]
    n_b = len(branches)
    alphas = [1.0] * n_b
    betas = [1.0] * n_b

    lag_nodes, lag_wts = np.polynomial.laguerre.laggauss(160)
    leg_nodes, leg_wts = np.polynomial.legendre.leggauss(200)

    def _cell_rule(lo, hi):
        # nodes/weights integrating e^-g f(g) over the cell
        if math.isinf(hi):
            return lag_nodes + lo, lag_wts * math.exp(-lo)
        g = 0.5 * (hi - lo) * (leg_nodes + 1.0) + lo
        w = 0.5 * (hi - lo) * leg_wts * np.exp(-g)
        return g, w

    def branch_stats(alphas, betas, lam):
        """per-branch (prob, sqrt P~, E[|Y|^2]), plus total budget."""
        stats = []
        total_power = 0.0
        for (lo, hi), al, be in zip(branches, alphas, betas):
            pr = _gain_cell_prob(law, lo, hi)
            g, w = _cell_rule(lo, hi)
            sqrt_p = al * np.sqrt(g) / (lam + be * g)
            pw = sqrt_p**2
            total_power += float(np.dot(w, pw))
            sqrt_pt = float(np.dot(w, np.sqrt(g) * sqrt_p)) / pr
            e_y2 = 1.0 + float(np.dot(w, g * pw)) / pr
            stats.append((pr, sqrt_pt, e_y2))
        return stats, total_power

    def solve_lam(alphas, betas):
        f = lambda lam: branch_stats(alphas, betas, lam)[1] - p
        return bisect_root(f, (1e-8, 100.0), tol=p * BUDGET_RTOL * 1e-2)

    history = []
    lam = solve_lam(alphas, betas)
    for it in range(max_iter):
        stats, _ = branch_stats(alphas, betas, lam)
        new_alphas, new_betas = [], []
        for pr, sqrt_pt, e_y2 in stats:
            p_tilde = sqrt_pt**2
            gap = max(e_y2 - p_tilde, 1e-14)
            new_alphas.append(sqrt_pt / gap)
            new_betas.append(p_tilde / (gap * e_y2))
        delta = max(
            abs(na - a) + abs(nb - b)
            for na, a, nb, b in zip(new_alphas, alphas, new_betas, betas)
        )
        alphas = [damping * na + (1 - damping) * a for na, a in zip(new_alphas, alphas)]
        betas = [damping * nb + (1 - damping) * b for nb, b in zip(new_betas, betas)]
        lam = solve_lam(alphas, betas)
        history.append(delta)
        if delta < tol * max(1.0, max(alphas)):
            break

    stats, _ = branch_stats(alphas, betas, lam)
    rate = sum(pr * math.log1p(sqrt_pt**2 / (e_y2 - sqrt_pt**2)) for pr, sqrt_pt, e_y2 in stats)

    def policy_fn(g, alphas=alphas, betas=betas, lam=lam):
        for (lo, hi), al, be in zip(branches, alphas, betas):
            if lo <= g < hi:
                return (al * math.sqrt(g) / (lam + be * g)) ** 2
        return 0.0

    diag = {"iterations": len(history), "last_delta": history[-1] if history else 0.0,
            "alphas": alphas, "betas": betas, "lam": lam,
            "converged": bool(history and history[-1] < tol * max(1.0, max(alphas)))}
    policy = PowerPolicy("gmi-optimal", policy_fn, p, diag)
    return policy, RateResult.make(rate, p), diag


# ---------------------------------------------------------------------------
# two-point partial-CSIT closed forms


def oof_partial_csit_powers(eps, p, mode="best_csir"):
    """Power split for the two-state law with CSIT flipped w.p. eps.

    mode "best_csir": capacity-achieving split for S_R = H sqrt(P(S_T)):
    P(0) = (2 eps P - (1-2 eps)/2)^+, P(2) = 2P - P(0), and the capacity.
    mode "forward_gmi": the K=1 forward-GMI-optimal split for S_R = H via
    the two-parameter fixed point. Returns (P(0), P(2), RateResult).
    """
    if not 0.0 <= eps <= 0.5:
        raise UsageError("flip probability must be in [0, 1/2]")
    eb = 1.0 - eps
    if mode == "best_csir":
        p0 = max(2.0 * eps * p - (eb - eps) / 2.0, 0.0)
        p2 = 2.0 * p - p0
        rate = 0.5 * eps * math.log1p(2.0 * p0) + 0.5 * eb * math.log1p(2.0 * p2)
        return p0, p2, RateResult.make(rate, p)
    if mode != "forward_gmi":
        raise UsageError(f"unknown mode {mode!r}")

    # fixed point over (gamma, beta): sqrt(P(s_T)) = w(s_T)/(gamma + beta w(s_T))
    # with w(0) = eps, w(2) = 1 - eps; beta = 2 sqrt(P~)/E[|Y|^2 | on-state]
    def powers_for(gamma, beta):
        s0 = eps / (gamma + beta * eps)
        s2 = eb / (gamma + beta * eb)
        return s0 * s0, s2 * s2

    beta = 0.0
    for _ in range(500):
        gamma = bisect_root(
            lambda gm: sum(powers_for(gm, beta)) - 2.0 * p, (1e-9, 1e9), tol=p * 1e-12
        )
        p0, p2 = powers_for(gamma, beta)
        sqrt_pt = eps * math.sqrt(p0) + eb * math.sqrt(p2)
        e_y2 = 1.0 + 2.0 * (eps * p0 + eb * p2)
        new_beta = 2.0 * sqrt_pt / e_y2
        if abs(new_beta - beta) < 1e-13 * max(1.0, beta):
            beta = new_beta
            break
        beta = 0.5 * (beta + new_beta)
    gamma = bisect_root(
        lambda gm: sum(powers_for(gm, beta)) - 2.0 * p, (1e-9, 1e9), tol=p * 1e-12
    )
    p0, p2 = powers_for(gamma, beta)
    sqrt_pt = eps * math.sqrt(p0) + eb * math.sqrt(p2)
    var_term = 2.0 * eps * eb * (math.sqrt(p2) - math.sqrt(p0)) ** 2
    snr = 2.0 * sqrt_pt**2 / (1.0 + var_term)
    rate = 0.5 * math.log1p(snr)
    return p0, p2, RateResult.make(rate, p)
