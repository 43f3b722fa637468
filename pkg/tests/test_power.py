"""Power-policy optimizer checks: waterfilling closed forms, Lagrangian
stationarity, quantized CSIT, the truncated heuristics, TMMSE and the
GMI-optimal fixed point."""

import math

import numpy as np
import pytest
from scipy import integrate

from fadingrates.channel import FadingLaw, UsageError
from fadingrates.numerics import LOG2, integrate_exp_weighted, wideband_metrics
from fadingrates.power import (
    heuristic_policy,
    oof_partial_csit_powers,
    optimal_policy_fixed_point,
    quad_waterfill,
    quad_waterfill_level,
    quad_waterfill_rayleigh_lmmse,
    quantized_csit_powers,
    tci_threshold_root,
    tcp_csir_saturation,
    tmmse_optimize,
    tmmse_rate,
    waterfill,
)
from fadingrates.specfun import exp_integral_e1, exp_scaled_e1

ONOFF = FadingLaw.on_off()
RAYLEIGH = FadingLaw.rayleigh()


class TestWaterfill:
    def test_rayleigh_lambda_one(self):
        # lam = 1: P = 1/e - E1(1), C = E1(1)
        p_ref = math.exp(-1.0) - exp_integral_e1(1.0)
        lam, policy, rate = waterfill(RAYLEIGH, p_ref)
        assert lam == pytest.approx(1.0, abs=1e-7)
        assert rate.nats == pytest.approx(exp_integral_e1(1.0), abs=1e-6)
        assert p_ref == pytest.approx(0.14850, abs=1e-5)
        assert rate.nats == pytest.approx(0.21938, abs=1e-5)

    def test_rayleigh_quadrature_cross_check(self):
        p = 0.5
        lam, policy, rate = waterfill(RAYLEIGH, p)
        budget_quad, _ = integrate.quad(lambda g: math.exp(-g) * policy(g), 0, np.inf)
        cap_quad, _ = integrate.quad(
            lambda g: math.exp(-g) * math.log1p(g * policy(g)), 0, np.inf
        )
        assert budget_quad == pytest.approx(p, abs=1e-8)
        assert cap_quad == pytest.approx(rate.nats, abs=1e-8)

    def test_no_fading(self):
        law = FadingLaw.discrete([(1.0, 1.0)])
        lam, policy, rate = waterfill(law, 3.0)
        assert policy(1.0) == pytest.approx(3.0, abs=1e-8)
        assert rate.nats == pytest.approx(math.log(4.0), rel=1e-7)

    def test_onoff_capacity(self):
        lam, policy, rate = waterfill(ONOFF, 2.0)
        assert policy(2.0) == pytest.approx(4.0, abs=1e-7)
        assert rate.nats == pytest.approx(0.5 * math.log1p(8.0), rel=1e-7)

    def test_low_snr_ebn0_diverges(self):
        # Eb/N0 ~ log 2 / lam, decreasing without bound as P -> 0
        vals = []
        for p in (1e-2, 1e-4, 1e-6):
            lam, _, rate = waterfill(RAYLEIGH, p)
            vals.append(rate.ebn0_db)
        assert vals[0] > vals[1] > vals[2]

    def test_stationarity(self):
        lam, policy, _ = waterfill(RAYLEIGH, 1.0)
        for g in (lam * 1.5, lam * 3.0, lam * 10.0):
            # d/dP log(1+gP) = g/(1+gP) = lam at the waterfilling solution
            assert g / (1.0 + g * policy(g)) == pytest.approx(lam, rel=1e-6)


class TestQuantizedCsit:
    def test_budget_and_stationarity(self):
        lam, policy, rate = quantized_csit_powers(RAYLEIGH, 1.0, 0.5)
        p_on = math.exp(-1.0)
        budget = (1.0 - p_on) * policy(0.0) + p_on * policy(1.0)
        assert budget == pytest.approx(0.5, rel=1e-8)
        for bit, (lo, hi) in ((0, (0.0, 1.0)), (1, (1.0, np.inf))):
            pw = policy(float(bit))
            if pw <= 0.0:
                continue
            pr = math.exp(-lo) - (math.exp(-hi) if np.isfinite(hi) else 0.0)
            val, _ = integrate.quad(
                lambda g: math.exp(-g) * g / (1.0 + g * pw), lo, hi if np.isfinite(hi) else np.inf
            )
            assert val / pr == pytest.approx(lam, rel=1e-6)

    def test_low_power_cell_zeroed(self):
        lam, policy, rate = quantized_csit_powers(RAYLEIGH, 1.0, 0.01)
        assert policy(0.0) == 0.0
        assert policy(1.0) == pytest.approx(0.01 / math.exp(-1.0), rel=1e-8)

    def test_wideband_gain_over_no_csit(self):
        # min Eb/N0 improves by 10 log10(1 + delta) dB
        for delta, gain in ((1.0, 3.01), (2.0, 4.77), (0.5, 1.76)):
            fn = lambda p: quantized_csit_powers(RAYLEIGH, delta, p)[2].nats if p > 0 else 0.0
            wb = wideband_metrics(fn, h=1e-4)
            assert wb.ebn0_min_db == pytest.approx(-1.59 - gain, abs=0.05)

    def test_noiseless_limit(self):
        a = quantized_csit_powers(RAYLEIGH, 1.0, 0.3, eps=0.0)
        b = quantized_csit_powers(RAYLEIGH, 1.0, 0.3, eps=1e-12)
        assert a[2].nats == pytest.approx(b[2].nats, rel=1e-6)

    def test_noisy_cdot(self):
        # eps = 0.1, delta = 1: Cdot(0) = E[G | S_T = 1] ~ 1.746
        eps, delta = 0.1, 1.0
        fn = lambda p: quantized_csit_powers(RAYLEIGH, delta, p, eps=eps)[2].nats if p > 0 else 0.0
        wb = wideband_metrics(fn, h=1e-4)
        e_g_on = (eps + (1 - 2 * eps) * 2.0 * math.exp(-1.0)) / (eps + (1 - 2 * eps) * math.exp(-1.0))
        assert wb.cdot0 == pytest.approx(e_g_on, abs=0.01)
        assert wb.ebn0_min_db == pytest.approx(-4.01, abs=0.03)

    def test_onoff_matches_full_csit(self):
        _, _, rate = quantized_csit_powers(ONOFF, 1.0, 2.0)
        assert rate.nats == pytest.approx(0.5 * math.log1p(8.0), rel=1e-7)


class TestQuadWaterfill:
    def test_zero_variance_is_conventional(self):
        # bit-identical power levels on a 64-point lambda grid
        for lam in np.logspace(-3, 0.3, 64):
            for g in (0.3, 1.0, 2.5):
                assert quad_waterfill_level(lam, g, 0.0) == max(1.0 / lam - 1.0 / g, 0.0)

    def test_small_variance_continuity(self):
        lv0 = quad_waterfill_level(0.5, 2.0, 0.0)
        lv1 = quad_waterfill_level(0.5, 2.0, 1e-10)
        assert lv1 == pytest.approx(lv0, rel=1e-8)

    def test_discrete_budget(self):
        cells = [(0.5, 0.02, 0.18), (0.5, 1.62, 0.18)]  # flip eps = 0.1 gains
        lam, policy, rate = quad_waterfill(cells, 2.0)
        budget = 0.5 * (policy(0) + policy(1))
        assert budget == pytest.approx(2.0, rel=1e-8)

    def test_onoff_high_snr_saturation(self):
        # rate approaches 0.5 log(1+eps/eb) + 0.5 log(1+eb/eps) = 1.74 bits
        eps = 0.1
        cells = [(0.5, 2 * eps**2, 2 * eps * (1 - eps)), (0.5, 2 * (1 - eps) ** 2, 2 * eps * (1 - eps))]
        _, _, rate = quad_waterfill(cells, 1e6)
        target = 0.5 * math.log1p(eps / (1 - eps)) + 0.5 * math.log1p((1 - eps) / eps)
        assert rate.nats == pytest.approx(target, abs=2e-3)
        assert target / LOG2 == pytest.approx(1.74, abs=0.01)

    def test_rayleigh_lmmse_vs_direct_quadrature(self):
        eps, p = 0.2, 1.5
        lam, policy, rate = quad_waterfill_rayleigh_lmmse(eps, p)
        def f(s):
            lv = policy(s)
            return math.exp(-s) * math.log1p((1 - eps) * s * lv / (1.0 + eps * lv))
        ref, _ = integrate.quad(f, lam / (1 - eps), np.inf, limit=300)
        assert rate.nats == pytest.approx(ref, abs=1e-6)
        budget, _ = integrate.quad(lambda s: math.exp(-s) * policy(s), 0, np.inf, limit=300)
        assert budget == pytest.approx(p, rel=1e-6)

    def test_lmmse_eps_zero_is_waterfilling(self):
        p = 0.8
        lam_q, _, rate_q = quad_waterfill_rayleigh_lmmse(1e-12, p)
        lam_w, _, rate_w = waterfill(RAYLEIGH, p)
        assert lam_q == pytest.approx(lam_w, rel=1e-5)
        assert rate_q.nats == pytest.approx(rate_w.nats, rel=1e-5)


class TestHeuristics:
    def test_tcp_low_snr_optimum(self):
        # best threshold 0.283, min Eb/N0 -0.90 dB
        def ebn0(t):
            _, _, wb = heuristic_policy(RAYLEIGH, 0, t, 1e-3)
            return wb.ebn0_min_db

        ts = np.linspace(0.05, 0.8, 151)
        vals = [ebn0(t) for t in ts]
        t_star = ts[int(np.argmin(vals))]
        assert t_star == pytest.approx(0.283, abs=0.005)
        assert min(vals) == pytest.approx(-0.90, abs=0.03)

    def test_tcp_high_snr_saturation(self):
        _, rate, _ = heuristic_policy(RAYLEIGH, 0, 0.0, 1e9)
        assert rate.bits == pytest.approx(math.log2(4.0 / (4.0 - math.pi)), abs=1e-4)
        assert rate.bits == pytest.approx(2.22, abs=0.01)

    def test_tmf(self):
        _, rate, wb = heuristic_policy(RAYLEIGH, 1, 0.0, 2.0)
        assert rate.nats == pytest.approx(math.log1p(2.0 / 3.0), rel=1e-9)
        assert wb.ebn0_min_db == pytest.approx(-1.59, abs=0.02)
        _, rate_hi, _ = heuristic_policy(RAYLEIGH, 1, 0.0, 1e9)
        assert rate_hi.bits == pytest.approx(1.0, abs=0.005)

    def test_tci(self):
        t_star = tci_threshold_root()
        assert 0.60 <= t_star <= 0.62
        _, _, wb = heuristic_policy(RAYLEIGH, -1, t_star, 1e-3)
        assert wb.ebn0_min_db == pytest.approx(0.194, abs=0.02)

    def test_tci_closed_form(self):
        t, p = 0.4, 3.0
        _, rate, _ = heuristic_policy(RAYLEIGH, -1, t, p)
        e1 = exp_integral_e1(t)
        ref = math.log1p(p / (math.exp(2 * t) * e1 + p * (math.exp(t) - 1.0)))
        assert rate.nats == pytest.approx(ref, rel=1e-9)

    def test_tci_prelog_one(self):
        # t = 1/P gives rate ~ log(1 + P / (1 + log P)) at large P
        p = 1e6
        _, rate, _ = heuristic_policy(RAYLEIGH, -1, 1.0 / p, p)
        assert rate.nats == pytest.approx(math.log1p(p / (1.0 + math.log(p))), rel=0.02)

    def test_indicator_csir_tcp(self):
        # high-SNR saturation 2.35 bits at t ~ 0.163
        ts = np.linspace(0.02, 0.6, 100)
        sats = [tcp_csir_saturation(t) for t in ts]
        k = int(np.argmax(sats))
        assert ts[k] == pytest.approx(0.163, abs=0.01)
        assert sats[k] / LOG2 == pytest.approx(2.35, abs=0.02)
        _, rate, _ = heuristic_policy(RAYLEIGH, 0, ts[k], 1e8, csir="indicator")
        assert rate.nats == pytest.approx(sats[k], rel=1e-3)

    def test_indicator_csir_tmf_ebn0(self):
        _, _, wb = heuristic_policy(RAYLEIGH, 1, 1.0, 1e-3, csir="indicator")
        assert wb.ebn0_min_db == pytest.approx(10 * math.log10(LOG2 / 2.0), abs=0.02)

    def test_tmf_dominates_at_t0(self):
        # min Eb/N0 ordering: TMF <= TCP and TMF <= TCI (t = 0 limit uses small t)
        _, _, wb_tmf = heuristic_policy(RAYLEIGH, 1, 0.0, 1e-3)
        _, _, wb_tcp = heuristic_policy(RAYLEIGH, 0, 0.0, 1e-3)
        _, _, wb_tci = heuristic_policy(RAYLEIGH, -1, 0.05, 1e-3)
        assert wb_tmf.ebn0_min_db <= wb_tcp.ebn0_min_db + 1e-9
        assert wb_tmf.ebn0_min_db <= wb_tci.ebn0_min_db + 1e-9

    def test_degenerate_threshold(self):
        with pytest.raises(UsageError):
            heuristic_policy(RAYLEIGH, -1, 0.0, 1.0)  # E[1/G] diverges


class TestTmmse:
    def test_budget(self):
        policy, rate = tmmse_optimize(RAYLEIGH, 2.0)
        budget = integrate_exp_weighted(
            lambda g: np.array([policy(x) for x in g]), (0.0, np.inf)
        )
        assert budget == pytest.approx(2.0, rel=1e-7)

    def test_shape_limits(self):
        # small beta: inversion-like P ~ 1/g; large beta: matched-filter-like P ~ g
        lo = tmmse_rate(RAYLEIGH, 1e-6, 0.0, 1.0, "none")
        _, _, _ = (lo, None, None)
        p_small = lambda b: (lambda g: g / (b + g) ** 2)
        f = p_small(1e-8)
        assert f(2.0) / f(4.0) == pytest.approx(2.0, rel=1e-3)  # ~ 1/g
        f = p_small(1e8)
        assert f(4.0) / f(2.0) == pytest.approx(2.0, rel=1e-3)  # ~ g

    @pytest.mark.parametrize("p", [0.1, 1.0, 10.0])
    def test_beats_heuristics(self, p):
        _, rate = tmmse_optimize(RAYLEIGH, p)
        _, tcp, _ = heuristic_policy(RAYLEIGH, 0, 0.0, p)
        _, tmf, _ = heuristic_policy(RAYLEIGH, 1, 0.0, p)
        _, tci, _ = heuristic_policy(RAYLEIGH, -1, max(1.0 / p, 0.3), p)
        assert rate.nats >= max(tcp.nats, tmf.nats, tci.nats) - 1e-9


class TestFixedPoint:
    def test_matches_tmmse_at_t0(self):
        p = 1.0
        policy_fp, rate_fp, diag = optimal_policy_fixed_point(RAYLEIGH, p)
        _, rate_tm = tmmse_optimize(RAYLEIGH, p)
        assert diag["converged"]
        assert rate_fp.nats == pytest.approx(rate_tm.nats, abs=1e-6)

    def test_policy_residual(self):
        p = 2.0
        policy, rate, diag = optimal_policy_fixed_point(RAYLEIGH, p)
        al, be, lam = diag["alphas"][0], diag["betas"][0], diag["lam"]
        for g in (0.2, 1.0, 3.0):
            target = (al * math.sqrt(g) / (lam + be * g)) ** 2
            assert policy(g) == pytest.approx(target, abs=1e-6)

    def test_two_branch(self):
        p, t = 1.0, 0.8
        policy, rate, diag = optimal_policy_fixed_point(RAYLEIGH, p, csir="indicator", t=t)
        assert diag["converged"]
        assert len(diag["alphas"]) == 2
        # indicator CSIR should beat no CSIR at the same power
        _, rate0, _ = optimal_policy_fixed_point(RAYLEIGH, p)
        assert rate.nats >= rate0.nats - 1e-7

    @pytest.mark.parametrize("p", [0.2, 2.0])
    def test_beats_all_heuristics(self, p):
        _, rate, _ = optimal_policy_fixed_point(RAYLEIGH, p)
        for a, t in ((0, 0.0), (0, 0.283), (1, 0.0), (-1, 0.61)):
            _, r, _ = heuristic_policy(RAYLEIGH, a, t, p)
            assert rate.nats >= r.nats - 1e-7


class TestOofPartialCsit:
    def test_best_csir_high_snr(self):
        eps = 0.1
        p = 5.0
        p0, p2, rate = oof_partial_csit_powers(eps, p)
        assert p0 == pytest.approx(2 * eps * p - (1 - 2 * eps) / 2.0, rel=1e-12)
        h2 = -eps * math.log2(eps) - (1 - eps) * math.log2(1 - eps)
        target = 0.5 * math.log1p(2.0 * p) / LOG2 + 0.5 * (1.0 - h2)
        assert rate.bits == pytest.approx(target, rel=1e-10)

    def test_best_csir_gain_constants(self):
        h2 = -0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)
        delta_c = 0.5 * (1.0 - h2)
        assert delta_c == pytest.approx(0.27, abs=0.01)
        assert 2 * delta_c * 10 * math.log10(2.0) == pytest.approx(1.60, abs=0.02)

    def test_best_csir_low_snr(self):
        eps = 0.1
        fn = lambda p: oof_partial_csit_powers(eps, p)[2].nats if p > 0 else 0.0
        wb = wideband_metrics(fn, h=1e-4)
        assert wb.cdot0 == pytest.approx(2 * (1 - eps), abs=1e-3)
        assert wb.ebn0_min_db == pytest.approx(-4.14, abs=0.03)

    def test_forward_gmi_low_snr(self):
        eps = 0.1
        fn = lambda p: oof_partial_csit_powers(eps, p, mode="forward_gmi")[2].nats if p > 0 else 0.0
        wb = wideband_metrics(fn, h=1e-4)
        assert wb.cdot0 == pytest.approx(2 * (eps**2 + (1 - eps) ** 2), abs=1e-3)
        assert wb.ebn0_min_db == pytest.approx(-3.74, abs=0.03)

    def test_budget_split(self):
        for mode in ("best_csir", "forward_gmi"):
            p0, p2, _ = oof_partial_csit_powers(0.1, 2.0, mode=mode)
            assert 0.5 * (p0 + p2) == pytest.approx(2.0, rel=1e-9)


class TestMonotonicity:
    def test_rates_nondecreasing_in_power(self):
        grid = np.logspace(-2, 2, 9)
        curves = {
            "waterfill": [waterfill(RAYLEIGH, p)[2].nats for p in grid],
            "quant": [quantized_csit_powers(RAYLEIGH, 1.0, p)[2].nats for p in grid],
            "tmf": [heuristic_policy(RAYLEIGH, 1, 0.0, p)[1].nats for p in grid],
            "tmmse": [tmmse_optimize(RAYLEIGH, p)[1].nats for p in grid],
            "oof": [oof_partial_csit_powers(0.1, p)[2].nats for p in grid],
        }
        for name, vals in curves.items():
            assert np.all(np.diff(vals) > -1e-12), name
