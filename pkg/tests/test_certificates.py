import math

import pytest

from phstab import certificates
from phstab.certificates import (
    DISSIPATION,
    CertificateError,
    ObservabilityWindowError,
    StabilityCertificate,
)
from phstab.model import DeclaredBounds, preset_string, preset_timoshenko, validate
from phstab.model.validation import CONTRACTIVITY


@pytest.fixture
def breathing_string():
    """H = h(t) I with h = 1 - 0.2 cos(2t); the energy follows h."""
    return preset_string(
        rho="1/(1 - 0.2*cos(2*t))",
        T="1 - 0.2*cos(2*t)",
        k=0.0,
        declared=DeclaredBounds(m=0.8, M=1.2, M_T=0.4),
    )


class TestConstants:
    def test_gamma(self, unit_string):
        assert certificates.gamma_min(unit_string) == pytest.approx(1.0)
        assert certificates.gamma_holds(unit_string, 1.0)
        assert not certificates.gamma_holds(unit_string, 0.5)

    def test_observability_constant(self, unit_string):
        assert certificates.C_tau(unit_string, 4.0) == pytest.approx(0.5)
        assert certificates.C_tau(unit_string, 2.5) == pytest.approx(2.0)

    def test_window_too_short(self, unit_string):
        with pytest.raises(ObservabilityWindowError) as error:
            certificates.C_tau(unit_string, 2.0)
        assert error.value.minimum == pytest.approx(2.0)
        assert error.value.hypothesis == "observability_window"

    def test_huge_exponent(self):
        assert math.isinf(certificates.observability_constant(10.0, 0.0, 1.0, 1.0, 100.0))

    def test_growth_rate(self, breathing_string):
        assert certificates.c_T(breathing_string) == pytest.approx(0.5)
        assert certificates.growth_constant(breathing_string, 2.0) == pytest.approx(math.exp(0.5))

    def test_coupling_constants(self):
        system = preset_timoshenko()
        assert certificates.kappa_tau(system) == pytest.approx(2.0)
        assert certificates.kappa_tau_literal(system) == pytest.approx(2.0)

    def test_rigorous_coupling_carries_the_condition_number(self):
        system = preset_timoshenko(K=2.0)
        # M / m = 2
        assert certificates.kappa_tau(system) == pytest.approx(4.0)
        assert certificates.kappa_tau_literal(system) == pytest.approx(2.0)

    def test_refine(self):
        assert certificates.refine_C_tau(0.5, 4.0, 1.0, 2) == (8.0, 0.25)
        with pytest.raises(ValueError):
            certificates.refine_C_tau(0.5, 4.0, 1.0, 0)
        with pytest.raises(ValueError):
            certificates.refine_C_tau(0.5, 4.0, 0.5, 2)

    def test_decay_rate(self):
        rho, omega = certificates.decay_rate(0.5, 0.5, 4.0)
        assert rho == pytest.approx(1.0 / 3.0)
        assert omega == pytest.approx(math.log(1.0 / 3.0) / 4.0)

    def test_default_grid_is_admissible(self, unit_string):
        grid = certificates.default_tau_grid(unit_string, 8)
        assert len(grid) == 8
        assert grid[0] > 2.0
        assert all(b > a for a, b in zip(grid, grid[1:]))


class TestDecayCertificate:
    def test_string(self, unit_string):
        certificate = certificates.decay_certificate(unit_string, 0.5, [2.5, 4.0, 8.0])
        assert certificate.tau == 4.0
        assert certificate.C_tau == pytest.approx(0.5)
        assert certificate.rho_tau == pytest.approx(1.0 / 3.0)
        assert certificate.omega == pytest.approx(-0.27465307, abs=1e-6)
        assert certificate.L == pytest.approx(3.0)
        assert certificate.amplitude_rate == pytest.approx(certificate.omega / 2.0)
        assert certificate.amplitude_prefactor == pytest.approx(math.sqrt(3.0))
        assert certificate.gamma_verified is True

    def test_inadmissible_windows_are_skipped(self, unit_string):
        certificate = certificates.decay_certificate(unit_string, 0.5, [1.0, 2.0, 8.0])
        assert certificate.tau == 8.0
        assert certificate.omega == pytest.approx(math.log(1.0 / 7.0) / 8.0)

    def test_no_admissible_window(self, unit_string):
        with pytest.raises(ObservabilityWindowError):
            certificates.decay_certificate(unit_string, 0.5, [1.0, 1.5])

    def test_default_grid(self, unit_string):
        certificate = certificates.decay_certificate(unit_string, 0.5)
        assert certificate.omega < 0.0
        assert certificate.L >= 1.0

    def test_no_dissipation(self, conservative_string):
        with pytest.raises(CertificateError) as error:
            certificates.decay_certificate(conservative_string, 0.0, [4.0])
        assert error.value.hypothesis == DISSIPATION

    def test_refuses_without_contractivity(self):
        system = preset_string(rho="1/(1 + 0.1*t)")
        with pytest.raises(CertificateError) as error:
            certificates.decay_certificate(system, 0.5, [4.0], report=validate(system))
        assert error.value.hypothesis == CONTRACTIVITY
        assert "counterexample" in str(error.value)

    def test_bound(self, unit_string):
        certificate = certificates.decay_certificate(unit_string, 0.5, [4.0])
        assert certificate.bound(4.0) == pytest.approx(1.0)
        assert certificate.bound(6.0, 2.0) == pytest.approx(1.0)

    def test_serialised(self, unit_string):
        payload = certificates.decay_certificate(unit_string, 0.5, [4.0]).as_dict()
        assert payload["assumptions_used"]["contractive"] is True
        assert payload["endpoint"] == "b"
        assert payload["kappa_tau_literal"] == 0.0

    def test_invariants(self):
        with pytest.raises(ValueError):
            StabilityCertificate(
                gamma=1.0,
                kappa_tau=0.0,
                c_T=0.0,
                tau=4.0,
                C_tau=0.5,
                kappa=0.5,
                rho_tau=1.0 / 3.0,
                omega=-0.27,
                L=0.5,
                amplitude_rate=-0.135,
                amplitude_prefactor=math.sqrt(0.5),
                length=1.0,
            )

    def test_table(self, unit_string):
        rows = certificates.certificate_table(unit_string, 0.5, [2.0, 4.0])
        assert rows[0]["C_tau"] is None
        assert rows[1]["rho_tau"] == pytest.approx(1.0 / 3.0)
