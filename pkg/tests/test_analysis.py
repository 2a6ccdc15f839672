import math

import numpy as np
import pytest

from phstab import analysis, certificates
from phstab.model import DeclaredBounds, preset_string
from phstab.solver import Trajectory, simulate

BUMP = ("0", "0.5*(1 + cos(pi*zeta))")


def synthetic(times, energies, trace_b=None):
    times = np.asarray(times, dtype=float)
    zeros = np.zeros((times.size, 2))
    return Trajectory(
        times=times,
        energies=np.asarray(energies, dtype=float),
        record_index=np.arange(times.size),
        trace_times=times,
        trace_a=zeros,
        trace_b=zeros if trace_b is None else np.asarray(trace_b, dtype=float),
    )


class TestDecayFit:
    def test_exponential(self):
        times = np.linspace(0.0, 5.0, 51)
        fit = analysis.decay_fit(synthetic(times, 2.0 * np.exp(-0.5 * times)))
        assert fit.omega_hat == pytest.approx(-0.5)
        assert fit.L_hat == pytest.approx(1.0)
        assert fit.residual == pytest.approx(0.0, abs=1e-10)
        assert fit.points == 51

    def test_window(self):
        times = np.linspace(0.0, 5.0, 51)
        fit = analysis.decay_fit_series(times, np.exp(-times), window=(0.95, 3.05))
        assert fit.window == pytest.approx((1.0, 3.0))
        assert fit.points == 21

    def test_energies_below_the_guard_are_ignored(self):
        times = np.linspace(0.0, 2.0, 21)
        energies = np.exp(-times)
        energies[15:] = 0.0
        assert analysis.decay_fit_series(times, energies).points == 15

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            analysis.decay_fit_series(np.arange(5.0), np.ones(5))


class TestInequalities:
    def test_growth_bound(self):
        times = np.linspace(0.0, 2.0, 21)
        trajectory = synthetic(times, np.exp(0.3 * times))
        assert analysis.check_growth_bound(trajectory, 0.5).passed
        report = analysis.check_growth_bound(trajectory, 0.1)
        assert not report.passed
        assert report.worst_ratio == pytest.approx(math.exp(0.4))
        assert report.witness == pytest.approx((0.0, 2.0))
        assert report.pairs_checked == 21 * 20 // 2

    def test_contraction(self):
        times = np.linspace(0.0, 2.0, 21)
        assert analysis.check_contraction(synthetic(times, np.exp(-times))).passed
        assert not analysis.check_contraction(synthetic(times, 1.0 + times)).passed

    def test_single_record(self):
        report = analysis.check_contraction(synthetic([0.0], [1.0]))
        assert report.passed and report.pairs_checked == 0

    def test_observability(self):
        times = np.linspace(0.0, 4.0, 41)
        trace = np.tile([1.0, 0.0], (times.size, 1))
        trajectory = synthetic(times, np.full(times.size, 0.5), trace_b=trace)
        report = analysis.check_observability(trajectory, None, 2.0, C=0.5, windows=4)
        assert report.passed
        assert report.worst_ratio == pytest.approx(1.0)
        assert len(report.rows) == 4
        failing = analysis.check_observability(trajectory, None, 2.0, C=0.25, windows=4)
        assert not failing.passed

    def test_observability_window_longer_than_the_run(self):
        times = np.linspace(0.0, 1.0, 11)
        with pytest.raises(ValueError):
            analysis.check_observability(synthetic(times, np.ones(11)), None, 2.0, C=1.0)

    @pytest.mark.parametrize("c", [0.01, 3.0])
    def test_observability_is_invariant_under_scaling(self, unit_string, c):
        scaled = ("0", "%r*0.5*(1 + cos(pi*zeta))" % c)
        reference = analysis.check_observability(simulate(unit_string, BUMP, 4.5, N=64), unit_string, 4.0)
        report = analysis.check_observability(simulate(unit_string, scaled, 4.5, N=64), unit_string, 4.0)
        assert report.worst_ratio == pytest.approx(reference.worst_ratio, rel=1e-9)
        assert report.passed == reference.passed
        for row, reference_row in zip(report.rows, reference.rows):
            assert row[1] == pytest.approx(c * c * reference_row[1], rel=1e-9)


class TestDatko:
    def test_exponential(self):
        times = np.linspace(0.0, 20.0, 4001)
        indicator = analysis.datko_indicator(synthetic(times, np.exp(-2.0 * times)))
        assert indicator.value == pytest.approx(0.5, rel=1e-4)
        assert not indicator.inconclusive

    def test_short_run_is_inconclusive(self):
        times = np.linspace(0.0, 1.0, 11)
        assert analysis.datko_indicator(synthetic(times, np.exp(-times))).inconclusive

    def test_zero_state(self):
        assert analysis.datko_indicator(synthetic([0.0, 1.0], [0.0, 0.0])).value == 0.0

    def test_p(self):
        with pytest.raises(ValueError):
            analysis.datko_indicator(synthetic([0.0, 1.0], [1.0, 1.0]), p=0.0)


@pytest.mark.slow
class TestSimulated:
    def test_certificate_is_sound(self, unit_string):
        certificate = certificates.decay_certificate(unit_string, 0.5, [4.0])
        trajectory = simulate(unit_string, BUMP, 5.5, N=100)
        comparison = analysis.compare_certificate(trajectory, certificate)
        assert comparison["soundness"]["passed"]
        assert comparison["certified"]["tau"] == 4.0
        assert comparison["at_least_as_fast"] is True

    def test_observability(self, unit_string):
        trajectory = simulate(unit_string, BUMP, 5.5, N=100)
        assert analysis.check_observability(trajectory, unit_string, 4.0).passed

    def test_datko(self, unit_string):
        trajectory = simulate(unit_string, BUMP, 8.0, N=100)
        indicator = analysis.datko_indicator(trajectory)
        assert not indicator.inconclusive
        assert 0.0 < indicator.value < 2.0

    def test_growth_bound_is_sharp(self):
        # H = h(t) I with h = 1 - 0.2 cos(2t), so E follows h and c_T = 0.5
        system = preset_string(
            rho="1/(1 - 0.2*cos(2*t))",
            T="1 - 0.2*cos(2*t)",
            k=0.0,
            declared=DeclaredBounds(m=0.8, M=1.2, M_T=0.4),
        )
        c_T = certificates.c_T(system)
        trajectory = simulate(system, BUMP, 2.0, N=100)
        assert analysis.check_growth_bound(trajectory, c_T).passed
        assert not analysis.check_growth_bound(trajectory, 0.5 * c_T).passed

    def test_contraction(self):
        system = preset_string(rho="1 + 0.1*t", k=0.5)
        trajectory = simulate(system, BUMP, 3.0, N=200)
        assert analysis.check_contraction(trajectory).passed
