from fractions import Fraction
import math

import pytest

from phstab import transportnet
from phstab._settings import GROWTH_SLOPE_THRESHOLD
from phstab.transportnet import (
    BOUNDED,
    DECAYING,
    GROWING,
    PiecewiseConstantProfile,
    SpeedSchedule,
)


def network(alpha):
    return transportnet.counterexample_network(alpha)


class TestSpeedSchedule:
    def test_counterexample_speeds(self):
        schedule = transportnet.counterexample_schedule()
        assert schedule.speeds_at(Fraction(1, 4)) == (2, 1)
        assert schedule.speeds_at(Fraction(1, 2)) == (1, 2)
        assert schedule.speeds_at(Fraction(7, 4)) == (1, 2)
        assert schedule.max_speed == 2

    def test_distances(self):
        schedule = transportnet.counterexample_schedule()
        assert schedule.distance_per_period(1) == Fraction(3, 2)
        assert schedule.cumulative(1, Fraction(1, 4)) == Fraction(1, 2)
        assert schedule.cumulative(2, Fraction(5, 4)) == Fraction(7, 4)
        assert schedule.inverse_cumulative(1, Fraction(11, 10)) == Fraction(3, 5)
        assert schedule.inverse_cumulative(1, Fraction(3, 2)) == 1

    def test_pieces_split_at_breakpoints(self):
        pieces = list(transportnet.counterexample_schedule().pieces(Fraction(1, 4), 1))
        assert [(start, end) for start, end, _ in pieces] == [
            (Fraction(1, 4), Fraction(1, 2)),
            (Fraction(1, 2), 1),
        ]

    def test_invalid(self):
        with pytest.raises(ValueError):
            SpeedSchedule.from_segments(1, [(Fraction(1, 2), 1, 1)])
        with pytest.raises(ValueError):
            SpeedSchedule.from_segments(1, [(0, 1, 0)])
        with pytest.raises(ValueError):
            SpeedSchedule.from_segments(0, [(0, 1, 1)])
        with pytest.raises(ValueError):
            transportnet.counterexample_schedule().speed(3, 0)

    def test_fractions(self):
        assert transportnet.as_fraction(0.1) == Fraction(1, 10)
        assert transportnet.as_fraction("3/4") == Fraction(3, 4)
        with pytest.raises(TypeError):
            transportnet.as_fraction(True)


class TestProfile:
    def test_merges_equal_neighbours(self):
        profile = PiecewiseConstantProfile.from_cells([0, Fraction(1, 2), 1], [2.0, 2.0])
        assert profile.breakpoints == (0, 1)
        assert profile.l2_norm_squared() == pytest.approx(4.0)

    def test_value_at(self):
        profile = PiecewiseConstantProfile.from_cells([0, Fraction(1, 2), 1], [1.0, 3.0])
        assert profile.value_at(Fraction(1, 2)) == 3.0
        assert profile.value_at(1) == 3.0
        assert profile.sup_norm() == 3.0
        with pytest.raises(ValueError):
            profile.value_at(2)

    def test_added(self):
        first = PiecewiseConstantProfile.from_cells([0, Fraction(1, 2), 1], [1.0, 0.0])
        second = PiecewiseConstantProfile.from_cells([0, Fraction(1, 4), 1], [1.0, 2.0])
        total = first.added(second)
        assert total.values == (2.0, 3.0, 2.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            PiecewiseConstantProfile((Fraction(0), Fraction(1, 2)), (1.0,))
        with pytest.raises(ValueError):
            PiecewiseConstantProfile((Fraction(0), Fraction(1)), (math.nan,))


class TestPropagate:
    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.6, 1.0])
    def test_first_period_norm(self, alpha):
        state = transportnet.state_at(network(alpha), 1)
        assert state.l2_norm() ** 2 == pytest.approx(19.0 * alpha ** 2 / 16.0)

    def test_first_period_profiles(self):
        state = transportnet.state_at(network(0.6), 1)
        first, second = state.profiles
        assert first.breakpoints == (0, Fraction(1, 2), Fraction(3, 4), 1)
        assert first.values == pytest.approx((0.3, 1.2, 0.0))
        assert second.values == pytest.approx((0.15,))

    def test_half_period(self):
        state = transportnet.state_at(network(0.6), Fraction(1, 2))
        assert state.value(1, Fraction(1, 3)) == pytest.approx(0.3)
        assert state.value(2, Fraction(1, 4)) == 1.0
        assert state.value(2, Fraction(3, 4)) == 0.0

    def test_propagation_is_incremental(self):
        net = network(0.6)
        halfway = transportnet.state_at(net, Fraction(3, 2))
        direct = transportnet.state_at(net, 3)
        assert transportnet.propagate(net, halfway, 3).l2_norm() == pytest.approx(direct.l2_norm())

    def test_no_backwards_propagation(self):
        net = network(0.6)
        with pytest.raises(ValueError):
            transportnet.propagate(net, transportnet.state_at(net, 1), Fraction(1, 2))

    def test_constant_speeds_preserve_the_norm(self):
        net = network(1.0).with_schedule(transportnet.constant_schedule())
        sequence = transportnet.growth_sequence(1.0, 5, net)
        assert sequence.norms == pytest.approx([1.0] * 6)
        assert sequence.verdict == BOUNDED


class TestTracer:
    def test_trace_values(self):
        net = network(0.6)
        assert transportnet.trace_value(net, 1, Fraction(1, 4), Fraction(9, 10)) == pytest.approx(0.3)
        assert transportnet.trace_value(net, 2, Fraction(1, 4), Fraction(1, 2)) == 1.0
        assert transportnet.trace_value(net, 1, 1, Fraction(3, 5)) == pytest.approx(1.2)

    def test_alpha_override(self):
        net = network(0.6)
        assert transportnet.trace_value(net, 1, 1, Fraction(3, 5), alpha=0.25) == pytest.approx(0.5)

    def test_agrees_with_propagation(self):
        net = network(0.6)
        state = transportnet.state_at(net, Fraction(5, 2))
        tracer = transportnet.CharacteristicTracer(net)
        for zeta in (Fraction(1, 7), Fraction(3, 7), Fraction(5, 11)):
            for line in (1, 2):
                assert tracer.value(line, Fraction(5, 2), zeta) == pytest.approx(state.value(line, zeta))

    def test_domain(self):
        tracer = transportnet.CharacteristicTracer(network(0.6))
        with pytest.raises(ValueError):
            tracer.value(1, -1, 0)
        with pytest.raises(ValueError):
            tracer.value(1, 1, Fraction(3, 2))

    def test_riemann_norm(self):
        net = network(0.6)
        exact = math.sqrt(19.0 / 16.0) * 0.6
        assert transportnet.riemann_l2_norm(net, 1, samples=400) == pytest.approx(exact, abs=1e-9)
        assert transportnet.l2_norm(net, 1, cross_check=True) == pytest.approx(exact)

    def test_l2_norm_checks_the_midpoint_rule_by_default(self, monkeypatch):
        net = network(0.6)
        exact = transportnet.l2_norm(net, Fraction(5, 2))
        assert exact == pytest.approx(transportnet.state_at(net, Fraction(5, 2)).l2_norm())
        monkeypatch.setattr(transportnet, "riemann_l2_norm", lambda net, t: 1.5 * exact)
        with pytest.raises(transportnet.QuadratureMismatch):
            transportnet.l2_norm(net, Fraction(5, 2))
        assert transportnet.l2_norm(net, Fraction(5, 2), cross_check=False) == exact

    def test_midpoint_error_bound(self):
        net = network(0.6)
        state = transportnet.state_at(net, Fraction(7, 3))
        bound = transportnet.midpoint_error_bound(state, 333)
        estimate = transportnet.riemann_l2_norm(net, Fraction(7, 3), samples=333)
        assert bound > 0.0
        assert abs(estimate ** 2 - state.l2_norm() ** 2) <= bound + 1e-12


ZETAS = (Fraction(0), Fraction(1, 7), Fraction(3, 7), Fraction(5, 11), Fraction(9, 10), Fraction(1))


class TestCausality:
    def test_later_speeds_do_not_matter(self):
        net = network(0.6)
        # same speeds as the counterexample on [0, 1/2), different afterwards
        altered = net.with_schedule(
            SpeedSchedule.from_segments(1, [(0, 2, 1), (Fraction(1, 2), 3, 1), (Fraction(3, 4), 1, 5)])
        )
        for t in (Fraction(1, 8), Fraction(1, 4), Fraction(3, 8), Fraction(7, 16)):
            for zeta in ZETAS:
                for line in (1, 2):
                    assert transportnet.trace_value(altered, line, t, zeta) == transportnet.trace_value(
                        net, line, t, zeta
                    )

    def test_data_outside_the_characteristics_does_not_matter(self):
        first = PiecewiseConstantProfile.from_cells([0, Fraction(1, 2), 1], [3.0, 5.0])
        second = PiecewiseConstantProfile.from_cells([0, Fraction(1, 2), 1], [2.0, 4.0])
        net = network(0.6).with_initial(first, second)
        perturbed = net.with_initial(
            PiecewiseConstantProfile.from_cells([0, Fraction(1, 4), Fraction(1, 2), 1], [7.0, -2.0, 5.0]),
            PiecewiseConstantProfile.from_cells([0, Fraction(1, 2), 1], [2.0, 9.0]),
        )
        t = Fraction(1, 4)
        # feet at line 1 zeta 5/8, line 2 zeta 3/8 and, after one crossing, line 2 zeta 1/5
        for line, zeta in ((1, Fraction(1, 8)), (2, Fraction(1, 8)), (1, Fraction(9, 10))):
            assert transportnet.trace_value(perturbed, line, t, zeta) == transportnet.trace_value(
                net, line, t, zeta
            )
        assert transportnet.trace_value(perturbed, 1, 0, Fraction(1, 4)) != transportnet.trace_value(
            net, 1, 0, Fraction(1, 4)
        )


class TestLinearity:
    @pytest.mark.parametrize("t", [Fraction(1, 3), Fraction(5, 2), Fraction(17, 4)])
    def test_additive_and_homogeneous_in_initial_data(self, t):
        u = (
            PiecewiseConstantProfile.from_cells([0, Fraction(1, 3), 1], [1.0, -2.0]),
            PiecewiseConstantProfile.constant(0.5),
        )
        v = (
            PiecewiseConstantProfile.constant(-1.5),
            PiecewiseConstantProfile.from_cells([0, Fraction(3, 5), 1], [2.0, 0.25]),
        )
        base = network(0.6)
        combined = base.with_initial(
            u[0].scaled(2.0).added(v[0].scaled(-3.0)), u[1].scaled(2.0).added(v[1].scaled(-3.0))
        )
        for zeta in ZETAS:
            for line in (1, 2):
                expected = 2.0 * transportnet.trace_value(
                    base.with_initial(*u), line, t, zeta
                ) - 3.0 * transportnet.trace_value(base.with_initial(*v), line, t, zeta)
                assert transportnet.trace_value(combined, line, t, zeta) == pytest.approx(
                    expected, abs=1e-12
                )


class TestGrowth:
    def test_classify(self):
        assert transportnet.classify_growth([1.0, 2.0, 4.0, 8.0]) == (pytest.approx(math.log(2.0)), GROWING)
        assert transportnet.classify_growth([1.0, 1.0, 1.0])[1] == BOUNDED
        assert transportnet.classify_growth([1.0, 0.5, 0.25, 0.125])[1] == DECAYING
        assert transportnet.classify_growth([1.0, 0.0, 0.0]) == (-math.inf, DECAYING)
        with pytest.raises(ValueError):
            transportnet.classify_growth([1.0])

    def test_growing(self):
        sequence = transportnet.growth_sequence(0.6, 20)
        assert sequence.verdict == GROWING
        assert len(sequence.norms) == 21
        assert sequence.claimed_factor == pytest.approx(1.2)
        assert sequence.sup_norms[1] == pytest.approx(1.2)
        assert sequence.norms[1] == pytest.approx(math.sqrt(19.0 / 16.0) * 0.6)

    def test_decaying(self):
        assert transportnet.growth_sequence(0.1, 20).verdict == DECAYING

    def test_rows(self):
        rows = list(transportnet.growth_sequence(0.6, 3).rows())
        assert len(rows) == 4
        assert rows[0][2] == 1.0

    def test_period_count(self):
        with pytest.raises(ValueError):
            transportnet.growth_sequence(0.6, 0)

    def test_envelope(self):
        net = network(0.6)
        envelope = transportnet.exponential_envelope(net)
        assert envelope.step == Fraction(1, 2)
        assert envelope.M_tilde == pytest.approx(2.0)
        assert envelope.omega_tilde == pytest.approx(math.log(2.0))
        sequence = transportnet.growth_sequence(0.6, 10)
        for k, norm in enumerate(sequence.norms):
            assert norm <= envelope.bound(k) * sequence.norms[0] + 1e-12

    @pytest.mark.slow
    def test_critical_alpha(self):
        alpha = transportnet.estimate_critical_alpha(periods=40, tolerance=1e-4)
        assert alpha == pytest.approx(0.5, abs=0.05)
        # bounded or barely growing at the threshold
        sequence = transportnet.growth_sequence(alpha, 50)
        assert abs(sequence.slope) <= 5.0 * GROWTH_SLOPE_THRESHOLD
        assert transportnet.growth_sequence(alpha - 0.05, 50).verdict != GROWING
