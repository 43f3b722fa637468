"""Block-fading checks: delayed-CSIT closed forms, the quantized-feedback
multiplier system, the pilot-plus-flash scheme, and the block GMI / bound."""

import math

import numpy as np
import pytest
from scipy import integrate

from fadingrates.blockfade import (
    BlockSpec,
    block_capacity_upper_bound,
    block_gmi_scalar,
    onoff_delayed_capacity,
    output_feedback_best,
    pilot_entropy_term,
    rayleigh_delayed_quantized,
    rayleigh_output_feedback_rate,
)
from fadingrates.channel import Csir, Csit, CsiSpec, FadingLaw, UsageError
from fadingrates.gmi import gmi_adaptive_csir
from fadingrates.numerics import ebn0_of, integrate_exp_weighted
from fadingrates.power import quantized_csit_powers
from fadingrates.specfun import marcum_q1

ONOFF = FadingLaw.on_off()
RAYLEIGH = FadingLaw.rayleigh()


class TestOnoffDelayed:
    def test_power_split_above_threshold(self):
        length, delay, p = 4, 1, 1.0
        p1, pd, rate, _ = onoff_delayed_capacity(length, delay, p)
        assert p1 == pytest.approx(p - 3.0 / 16.0, rel=1e-12)
        assert pd == pytest.approx(2.0 * p + 1.0 / 8.0, rel=1e-12)
        # budget: D P1 + (L-D) Pd / 2 = L P
        assert delay * p1 + (length - delay) * 0.5 * pd == pytest.approx(length * p, rel=1e-12)

    def test_full_delay_is_no_csit(self):
        _, _, rate, _ = onoff_delayed_capacity(3, 3, 2.0)
        assert rate.nats == pytest.approx(0.5 * math.log1p(4.0), rel=1e-12)

    @pytest.mark.parametrize("length,delay", [(2, 1), (3, 2), (4, 1)])
    def test_wideband_slope(self, length, delay):
        _, _, _, wb = onoff_delayed_capacity(length, delay, 0.1)
        assert wb.slope_s == pytest.approx(1.0 - delay / length, abs=0.02)

    def test_low_snr_3db_gain(self):
        # Cdot(0) = 2 for D < L vs 1 for D = L
        _, _, _, wb_fb = onoff_delayed_capacity(4, 2, 0.01)
        _, _, _, wb_no = onoff_delayed_capacity(4, 4, 0.01)
        assert wb_no.ebn0_min_db - wb_fb.ebn0_min_db == pytest.approx(3.01, abs=0.02)

    def test_delay_monotonicity(self):
        rates = [onoff_delayed_capacity(4, d, 0.5)[2].nats for d in range(5)]
        assert all(a >= b - 1e-12 for a, b in zip(rates, rates[1:]))


class TestRayleighDelayed:
    def test_l1_reduces_to_quantized_csit(self):
        p = 0.5
        lam_b, powers, rate_b = rayleigh_delayed_quantized(1, 1.0, p)
        lam_q, policy, rate_q = quantized_csit_powers(RAYLEIGH, 1.0, p)
        assert rate_b.nats == pytest.approx(rate_q.nats, rel=1e-7)
        assert powers["p_high"] == pytest.approx(policy(1.0), rel=1e-6)

    def test_budget(self):
        length, p = 3, 0.7
        lam, powers, rate = rayleigh_delayed_quantized(length, 1.0, p)
        pr_lo = 1.0 - math.exp(-1.0)
        total = (length - 1) * powers["p1"] + pr_lo * powers["p_low"] + math.exp(-1.0) * powers["p_high"]
        assert total == pytest.approx(length * p, rel=1e-8)

    def test_low_snr_silent_regime_boundary(self):
        # L = 3, delta = 1: below Eb/N0 ~ -2.97 dB only the high cell fires
        length, delta = 3, 1.0
        lo, hi = 1e-3, 1.0
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            _, powers, _ = rayleigh_delayed_quantized(length, delta, mid)
            if powers["p1"] > 0.0 or powers["p_low"] > 0.0:
                hi = mid
            else:
                lo = mid
        _, _, rate = rayleigh_delayed_quantized(length, delta, lo)
        assert rate.ebn0_db == pytest.approx(-2.97, abs=0.1)

    def test_feedback_beats_no_csit(self):
        from fadingrates.specfun import exp_scaled_e1

        for p in (0.05, 0.5, 5.0):
            _, _, rate = rayleigh_delayed_quantized(1, 1.0, p)
            no_csit = exp_scaled_e1(1.0 / p)
            assert rate.nats >= no_csit - 1e-9

    def test_low_snr_slope_ordering(self):
        # larger L (more delay) gives lower rates at fixed low power
        p = 0.02
        rates = [rayleigh_delayed_quantized(l, 1.0, p)[2].nats for l in (1, 2, 3)]
        assert rates[0] > rates[1] > rates[2]


class TestOutputFeedback:
    def test_pilot_off(self):
        length, delta, p2 = 5, 1.0, 0.8
        r = rayleigh_output_feedback_rate(length, delta, 0.0, p2)
        # first term vanishes; Pr{E|G} = e^(-delta^2) constant
        pr = math.exp(-delta * delta)
        ref = (length - 1) / length * integrate_exp_weighted(
            lambda g: pr * np.log1p(g * p2 / pr)
        )
        assert r.nats == pytest.approx(ref, rel=1e-6)

    def test_delta_zero_always_transmit(self):
        length, p1, p2 = 4, 0.5, 1.0
        r = rayleigh_output_feedback_rate(length, 0.0, p1, p2)
        second = (length - 1) / length * integrate_exp_weighted(lambda g: np.log1p(g * p2))
        first = pilot_entropy_term(p1) / length
        assert r.nats == pytest.approx(first + second, rel=1e-7)

    def test_pilot_entropy_positive_and_below_gaussian(self):
        # 0 <= I(X1;Y1|H) <= E[log(1 + G P1)]
        p1 = 2.0
        val = pilot_entropy_term(p1)
        upper = integrate_exp_weighted(lambda g: np.log1p(g * p1))
        assert 0.0 < val < upper

    def test_marcum_probability_matches_mc(self):
        delta, p1 = 1.0, 1.5
        rng = np.random.default_rng(5)
        n = 10**6
        g = rng.exponential(1.0, n)
        y1 = np.sqrt(p1 * g) + (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
        emp = np.mean(np.abs(y1) >= delta)
        ref = math.exp(-delta * delta / (p1 + 1.0))
        assert emp == pytest.approx(ref, abs=4.0 / math.sqrt(n))
        # conditional firing probability at a fixed gain
        g0 = 0.7
        y1 = np.sqrt(p1 * g0) + (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
        emp_c = np.mean(np.abs(y1) >= delta)
        assert emp_c == pytest.approx(
            marcum_q1(math.sqrt(2.0 * g0 * p1), math.sqrt(2.0) * delta), abs=4.0 / math.sqrt(n)
        )

    def test_turn_back_l20(self):
        # the (Eb/N0, rate) locus is non-monotone: some Eb/N0 values are
        # attained at two different powers
        grid = np.logspace(-2.5, 1.0, 18)
        ebn0 = []
        for p in grid:
            r, _ = output_feedback_best(20, p)
            ebn0.append(r.ebn0_db)
        diffs = np.diff(ebn0)
        assert diffs.min() < 0.0 < diffs.max()

    def test_needs_two_symbols(self):
        with pytest.raises(UsageError):
            rayleigh_output_feedback_rate(1, 1.0, 0.5, 0.5)


class TestBlockGmi:
    def test_l1_equals_scalar(self):
        csi = CsiSpec(csir=Csir("full_h"), csit=Csit("flip", eps=0.1))
        pol = lambda s: 1.5 if s > 1.0 else 0.5
        block = block_gmi_scalar(ONOFF, [csi], [pol])
        scalar = gmi_adaptive_csir(ONOFF, csi, pol)
        assert block.nats == pytest.approx(scalar.nats, rel=1e-12)

    def test_full_csir_meets_bound(self):
        # S_R = H sqrt(P): per-symbol terms are E[log(1 + G P_l)] and the
        # achievable rate equals the converse bound
        csis = [CsiSpec(csir=Csir("full_hp"), csit=Csit("quant_gain", bits=1, delta=1.0))] * 3
        pols = [lambda s: 2.0 if s > 1.0 else 0.1] * 3
        ach = block_gmi_scalar(RAYLEIGH, csis, pols)
        bound = block_capacity_upper_bound(RAYLEIGH, csis, pols)
        assert ach.nats == pytest.approx(bound.nats, rel=1e-10)

    def test_rate_independent_of_length(self):
        csi = CsiSpec(csir=Csir("full_h"), csit=Csit("quant_gain", bits=1, delta=1.0))
        pol = lambda s: 1.0
        r2 = block_gmi_scalar(RAYLEIGH, [csi] * 2, [pol] * 2)
        r5 = block_gmi_scalar(RAYLEIGH, [csi] * 5, [pol] * 5)
        assert r2.nats == pytest.approx(r5.nats, rel=1e-12)

    def test_gmi_below_bound(self):
        csi = CsiSpec(csir=Csir("full_h"), csit=Csit("flip", eps=0.1, delta=1.0))
        pol = lambda bit: 1.8 if bit >= 0.5 else 0.2
        ach = block_gmi_scalar(RAYLEIGH, [csi] * 2, [pol] * 2)
        bound = block_capacity_upper_bound(RAYLEIGH, [csi] * 2, [pol] * 2)
        assert ach.nats <= bound.nats + 1e-10

    def test_no_fading_bound(self):
        law = FadingLaw.discrete([(1.0, 1.0)])
        csi = CsiSpec(csir=Csir("full_hp"), csit=Csit("none"))
        bound = block_capacity_upper_bound(law, [csi], [lambda s: 3.0])
        assert bound.nats == pytest.approx(math.log(4.0), rel=1e-10)

    def test_output_feedback_bound_quad_vs_mc(self):
        scen = ("output_feedback", 1.0, 0.6, 1.2, 10)
        quad = block_capacity_upper_bound(RAYLEIGH, [], [], scenario=scen)
        mc = block_capacity_upper_bound(RAYLEIGH, [], [], scenario=scen, mc=(2 * 10**5, 99))
        assert quad.nats == pytest.approx(mc.nats, abs=4.0 * mc.uncertainty.ci_half_width + 1e-4)

    def test_achievable_below_feedback_bound(self):
        length, delta, p1, p2 = 10, 1.0, 0.6, 1.2
        ach = rayleigh_output_feedback_rate(length, delta, p1, p2)
        bound = block_capacity_upper_bound(
            RAYLEIGH, [], [], scenario=("output_feedback", delta, p1, p2, length)
        )
        assert ach.nats <= bound.nats + 1e-10

    def test_bad_spec(self):
        with pytest.raises(UsageError):
            BlockSpec(length=2, delay=3, feedback="delayed_gain", delta=1.0, power=1.0)
