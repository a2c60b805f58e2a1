import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import HIGH_NOISE, LOW_NOISE
from independent import GAMMA_REF, r_a_ref, r_max_ref
from leanslot import (
    InfeasibleRateError,
    LinkParams,
    Regime,
    SleepModel,
    allocate_asymptotic,
    allocate_exact,
    allocate_no_pmax,
    allocate_rush_to_sleep,
    allocate_uniform,
    ceil_floor,
    class_b_model,
    p_cons,
    r_max,
)
from leanslot.models import ActiveModel, TABLE_II_SLEEP
from leanslot.single_user import exact_structure, regime_report, round_half_away

# Reference optimum at low noise (N = 10) and high noise (N = 50).
LOW_NOISE_MARKERS = [
    (0.01, 56.050580303516),
    (0.920539313920788, 60.5833293069379),
    (1.83107862784158, 71.0089113541446),
    (2.74161794176236, 81.4353986361281),
    (3.65215725568315, 91.8304200108822),
    (4.56269656960394, 101.762406723826),
    (5.47323588352473, 111.815119361923),
    (6.38377519744551, 121.949414922617),
    (7.2943145113663, 132.141341038163),
    (8.20485382528709, 142.375451941303),
]
HIGH_NOISE_MARKERS = [
    (0.01, 51.743408762457),
    (0.175137721063383, 61.1905059621076),
    (0.340275442126766, 72.1239740205917),
    (0.505413163190149, 81.5840464365394),
    (1.16596404744368, 123.783987721169),
    (1.9916526527606, 174.028483996107),
    (2.15679037382398, 184.94114088725),
    (2.32192809488736, 194.433439236556),
]


def link(n, s2, rate):
    return LinkParams(n, 1e-3, s2, rate)


def exact_p(am, sm, lp):
    return p_cons(am, sm, lp, allocate_exact(am, sm, lp))


class TestRmax:
    def test_low_noise(self):
        assert r_max(20, 0.01) == pytest.approx(10.9665, abs=1e-4)

    def test_high_noise(self):
        assert r_max(20, 5) == pytest.approx(2.32192809488736, abs=1e-12)

    def test_unit(self):
        assert r_max(3.0, 3.0) == 1.0

    def test_bad_input(self):
        with pytest.raises(ValueError):
            r_max(0, 1)


class TestCeilFloor:
    def test_prefers_cheaper(self):
        assert ceil_floor(5.26, lambda k: {5: 1.0, 6: 2.0}[k]) == 5
        assert ceil_floor(5.26, lambda k: {5: 3.0, 6: 2.0}[k]) == 6

    def test_integer(self):
        assert ceil_floor(4.0, lambda k: float(k)) == 4

    def test_tie_goes_down(self):
        assert ceil_floor(2.5, lambda k: 1.0) == 2

    def test_infeasible_zero(self):
        assert ceil_floor(0.37, lambda k: math.inf if k == 0 else 1.0) == 1

    def test_both_infeasible(self):
        with pytest.raises(ValueError):
            ceil_floor(0.5, lambda k: math.inf)

    def test_round_half_away(self):
        assert [round_half_away(x) for x in (0.5, 1.5, 2.5, -0.5, 2.49)] == [1, 2, 3, -1, 2]


class TestNoPmax:
    toy = ActiveModel(p0=0.0, gamma=1.0, alpha=0.5, p_max=1e9)
    zero_sleep = SleepModel.constant(0.0)

    def test_low_rate_uses_one_slot(self):
        a = allocate_no_pmax(self.toy, self.zero_sleep, link(2, 1.0, 0.5))
        assert a.n_active == 1

    def test_high_rate_uses_both_slots(self):
        a = allocate_no_pmax(self.toy, self.zero_sleep, link(2, 1.0, 5.0))
        assert a.n_active == 2
        assert a.powers[0] == pytest.approx(a.powers[1])

    def test_rush_threshold_matches_brute_force(self):
        # Direct comparison of one slot against two uniform slots.
        for rate in np.linspace(0.05, 6, 60):
            one = math.sqrt(2 ** (2 * rate) - 1) / 2
            two = math.sqrt(2**rate - 1)
            best = 1 if one <= two else 2
            a = allocate_no_pmax(self.toy, self.zero_sleep, link(2, 1.0, rate))
            assert a.n_active == best, rate

    @pytest.mark.parametrize("rate", [0.1, 1.0, 3.0])
    def test_linear_pa_spreads_over_all_slots(self, rate):
        lin = ActiveModel(p0=0.0, gamma=1.0, alpha=1.0, p_max=1e9)
        a = allocate_no_pmax(lin, self.zero_sleep, link(6, 2.0, rate))
        assert a.n_active == 6
        np.testing.assert_allclose(a.powers, (2**rate - 1) * 2.0, rtol=1e-12)

    def test_load_independent_uses_one_slot(self):
        flat = ActiveModel(p0=100.0, gamma=0.0, alpha=0.5, p_max=1e9)
        a = allocate_no_pmax(flat, SleepModel.constant(10.0), link(8, 1.0, 0.7))
        assert a.n_active == 1

    def test_zero_rate_sleeps(self, am, sm_const):
        assert allocate_no_pmax(am, sm_const, link(5, 1.0, 0.0)).n_active == 0

    def test_needs_constant_sleep(self, am):
        with pytest.raises(ValueError):
            allocate_no_pmax(am, TABLE_II_SLEEP, link(5, 1.0, 1.0))


class TestExact:
    @pytest.mark.parametrize("rate,expected", LOW_NOISE_MARKERS)
    def test_low_noise_markers(self, am, sm_const, rate, expected):
        assert exact_p(am, sm_const, link(10, LOW_NOISE, rate)) == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("rate,expected", HIGH_NOISE_MARKERS)
    def test_high_noise_markers(self, am, sm_const, rate, expected):
        assert exact_p(am, sm_const, link(50, HIGH_NOISE, rate)) == pytest.approx(expected, rel=1e-9)

    def test_hand_trace_high_noise(self, am, sm_const):
        # Hand trace: 8 slots pinned at 20 W, the 9th carries 20 - 8 R_max bits.
        tr = exact_structure(am, sm_const, link(10, HIGH_NOISE, 2.0))
        assert (tr.n_max_slots, tr.n_uniform_slots) == (8, 1)
        resid = (2 ** (20 - 8 * r_max_ref(20, 5)) - 1) * 5
        assert tr.uniform_power == pytest.approx(resid, rel=1e-12)
        assert tr.uniform_power == pytest.approx(8.42, abs=5e-3)
        ref = (8 * (110 + GAMMA_REF * math.sqrt(20)) + 110 + GAMMA_REF * math.sqrt(resid) + 50) / 10
        assert exact_p(am, sm_const, link(10, HIGH_NOISE, 2.0)) == pytest.approx(ref, rel=1e-12)
        assert ref == pytest.approx(177.0, abs=0.05)

    def test_infeasible(self, am, sm_const):
        with pytest.raises(InfeasibleRateError, match="R_max"):
            allocate_exact(am, sm_const, link(10, HIGH_NOISE, 2.4))

    def test_rate_at_r_max(self, am, sm_const):
        lp = link(7, HIGH_NOISE, r_max(20, HIGH_NOISE))
        a = allocate_exact(am, sm_const, lp)
        assert a.n_active == 7
        np.testing.assert_allclose(a.powers, 20.0, rtol=1e-9)

    def test_zero_rate(self, am, sm_const):
        a = allocate_exact(am, sm_const, link(4, 1.0, 0.0))
        assert a.n_active == 0
        assert exact_p(am, sm_const, link(4, 1.0, 0.0)) == 50.0


@st.composite
def instances(draw, n_max=30):
    n = draw(st.integers(1, n_max))
    s2 = draw(st.floats(0.005, 10.0))
    frac = draw(st.floats(0.0, 1.0))
    return link(n, s2, frac * r_max(20, s2))


class TestExactProperties:
    @given(instances())
    def test_rate_is_met_exactly(self, lp):
        am, sm = class_b_model(), SleepModel.constant(50.0)
        a = allocate_exact(am, sm, lp)
        if lp.rate == 0:
            assert a.n_active == 0
        else:
            assert a.achieved_rate(lp.sigma2) == pytest.approx(lp.rate, rel=1e-9)

    @given(instances())
    def test_power_cap(self, lp):
        a = allocate_exact(class_b_model(), SleepModel.constant(50.0), lp)
        assert a.powers.max(initial=0.0) <= 20.0 * (1 + 1e-12)

    @given(instances())
    def test_non_max_slots_share_one_power(self, lp):
        a = allocate_exact(class_b_model(), SleepModel.constant(50.0), lp)
        act = a.powers[: a.n_active]
        rest = act[~np.isclose(act, 20.0, rtol=1e-12)]
        if rest.size:
            assert np.ptp(rest) <= 1e-12 * max(1.0, rest.max())

    @given(instances())
    def test_no_pmax_rate_exact(self, lp):
        a = allocate_no_pmax(class_b_model(), SleepModel.constant(50.0), lp)
        if lp.rate > 0:
            assert a.achieved_rate(lp.sigma2) == pytest.approx(lp.rate, rel=1e-9)

    @given(instances())
    def test_never_worse_than_rush_to_sleep(self, lp):
        am, sm = class_b_model(), SleepModel.constant(50.0)
        assert exact_p(am, sm, lp) <= allocate_rush_to_sleep(am, sm, lp).p_cons * (1 + 1e-12)

    @pytest.mark.parametrize("n,s2", [(10, LOW_NOISE), (50, HIGH_NOISE)])
    def test_never_worse_than_uniform_on_sweep(self, n, s2):
        # Known to fail at high noise: near R_max the greedy clamping of the
        # iterative solver loses to spreading over every slot.
        am, sm = class_b_model(), SleepModel.constant(50.0)
        worst = 0.0
        for rate in np.linspace(0.0, r_max(20, s2), 400):
            lp = link(n, s2, rate)
            worst = max(worst, exact_p(am, sm, lp) - allocate_uniform(am, sm, lp).p_cons)
        assert worst <= 1e-9, f"exact exceeds uniform by up to {worst:.4g} W"


class TestAsymptotic:
    def test_low_rate(self, am, sm_const):
        r = allocate_asymptotic(am, sm_const, link(10, LOW_NOISE, 0.01))
        assert r.p_cons == pytest.approx(50.1126, abs=1e-4)
        assert r.report.regime is Regime.LINEAR

    def test_boundary(self, am, sm_const):
        r = allocate_asymptotic(am, sm_const, link(10, LOW_NOISE, 8.20485382528709))
        assert r.p_cons == pytest.approx(142.375451941303, rel=1e-6)

    def test_full_rate(self, am, sm_const):
        r = allocate_asymptotic(am, sm_const, link(10, LOW_NOISE, r_max(20, LOW_NOISE)))
        assert r.p_cons == pytest.approx(194.433439236556, rel=1e-9)
        assert r.report.regime is Regime.EXPONENTIAL
        assert r.allocation.n_active == 10

    def test_high_noise_linear_with_r_max(self, am, sm_const):
        r = allocate_asymptotic(am, sm_const, link(50, HIGH_NOISE, 1.16596404744368))
        assert r.p_cons == pytest.approx(122.527662, abs=1e-3)
        assert r.report.regime is Regime.LINEAR
        assert r.report.r_tilde == r.report.r_max

    def test_report_constants(self, am, sm_const):
        rep = regime_report(am, sm_const, link(10, LOW_NOISE, 1.0))
        delta = 60 / (GAMMA_REF * math.sqrt(LOW_NOISE))
        assert rep.r_a == pytest.approx(r_a_ref(delta, 0.5), rel=1e-6)
        assert rep.p_a == pytest.approx((2**rep.r_a - 1) * LOW_NOISE, rel=1e-12)
        assert rep.r_max == pytest.approx(r_max_ref(20, LOW_NOISE))

    def test_rounding_shifts_rate(self, am, sm_const):
        r = allocate_asymptotic(am, sm_const, link(10, LOW_NOISE, 3.0))
        assert r.allocation.n_active == 4
        assert r.achieved_rate != pytest.approx(3.0)
        assert r.report.asymptotic_gap != 0

    def test_zero_rate(self, am, sm_const):
        r = allocate_asymptotic(am, sm_const, link(10, LOW_NOISE, 0.0))
        assert r.p_cons == 50.0
        assert r.allocation.n_active == 0

    def test_infeasible(self, am, sm_const):
        with pytest.raises(InfeasibleRateError):
            allocate_asymptotic(am, sm_const, link(10, HIGH_NOISE, 3.0))

    @given(instances())
    def test_regime_consistency(self, lp):
        r = allocate_asymptotic(class_b_model(), SleepModel.constant(50.0), lp)
        rep = r.report
        assert (rep.regime is Regime.LINEAR) == (lp.rate <= min(rep.r_a, rep.r_max))

    def test_gap_decays_like_one_over_n(self, am, sm_const):
        # The gap need not halve at every doubling (rounding makes it
        # oscillate) but it stays under the c / N envelope set at N = 10.
        rate = 3.0
        asym = allocate_asymptotic(am, sm_const, link(10, LOW_NOISE, rate)).p_cons
        gaps = {n: abs(exact_p(am, sm_const, link(n, LOW_NOISE, rate)) - asym)
                for n in (10, 20, 40, 80, 160, 320)}
        c = gaps[10] * 10
        for n, g in gaps.items():
            assert g <= 1.2 * c / n, (n, g)
        assert gaps[160] <= gaps[20] / 8 * 1.2


class TestBaselines:
    def test_uniform_low_rate(self, am, sm_const):
        assert allocate_uniform(am, sm_const, link(10, LOW_NOISE, 0.01)).p_cons == pytest.approx(
            110.157458178149, rel=1e-9)

    def test_uniform_curve_sample(self, am, sm_const):
        r = allocate_uniform(am, sm_const, link(10, LOW_NOISE, 8.53172646259335))
        assert r.p_cons == pytest.approx(146.271434658449, rel=1e-9)

    def test_uniform_zero(self, am, sm_const):
        r = allocate_uniform(am, sm_const, link(10, LOW_NOISE, 0.0))
        assert r.allocation.n_active == 10
        assert r.p_cons == pytest.approx(110.0)

    def test_uniform_full(self, am, sm_const):
        r = allocate_uniform(am, sm_const, link(50, HIGH_NOISE, r_max(20, HIGH_NOISE)))
        assert r.p_cons == pytest.approx(194.433, abs=1e-3)

    def test_rush_asymptotic(self, am, sm_const):
        r = allocate_rush_to_sleep(am, sm_const, link(10, LOW_NOISE, 1.09665054519057))
        assert r.p_cons_asymptotic == pytest.approx(64.4433, abs=1e-4)

    def test_rush_zero(self, am, sm_const):
        r = allocate_rush_to_sleep(am, sm_const, link(10, LOW_NOISE, 0.0))
        assert r.p_cons == 50.0 and r.p_cons_asymptotic == 50.0

    def test_rush_full(self, am, sm_const):
        r = allocate_rush_to_sleep(am, sm_const, link(10, LOW_NOISE, r_max(20, LOW_NOISE)))
        assert r.p_cons == pytest.approx(194.433439236556, rel=1e-9)
        assert r.p_cons_asymptotic == pytest.approx(194.433439236556, rel=1e-9)

    def test_rush_structure(self, am, sm_const):
        lp = link(10, HIGH_NOISE, 1.0)
        r = allocate_rush_to_sleep(am, sm_const, lp)
        # 10 bits over R_max = 2.32 bits per slot: 4 full slots and one partial.
        assert r.allocation.n_active == 5
        np.testing.assert_allclose(r.allocation.powers[:4], 20.0)
        assert r.allocation.achieved_rate(HIGH_NOISE) == pytest.approx(1.0, rel=1e-9)

    @given(instances())
    def test_rush_meets_rate(self, lp):
        r = allocate_rush_to_sleep(class_b_model(), SleepModel.constant(50.0), lp)
        assert r.allocation.achieved_rate(lp.sigma2) == pytest.approx(lp.rate, rel=1e-9, abs=1e-12)


class TestRushOptimalityRegimes:
    @given(st.integers(1, 40), st.floats(0.0, 1.0))
    def test_high_noise_rush_is_optimal(self, n, frac):
        am, sm = class_b_model(), SleepModel.constant(50.0)
        lp = link(n, HIGH_NOISE, frac * r_max(20, HIGH_NOISE))
        slot_term = (am.p0 - 50.0 + am.gamma * 20**0.5) / n
        diff = abs(exact_p(am, sm, lp) - allocate_rush_to_sleep(am, sm, lp).p_cons)
        assert diff <= slot_term + 1e-9

    def test_low_noise_exponential_regime_is_uniform(self, am, sm_const):
        for rate in np.linspace(8.3, r_max(20, LOW_NOISE), 12):
            lp = link(10, LOW_NOISE, rate)
            e = exact_p(am, sm_const, lp)
            assert e == pytest.approx(allocate_uniform(am, sm_const, lp).p_cons, rel=1e-9)
            assert e < allocate_rush_to_sleep(am, sm_const, lp).p_cons - 1e-6 or math.isclose(
                rate, r_max(20, LOW_NOISE))
