"""Constant chain of the growth bound and of the exponential decay certificate.

Energies are squared norms ``|x(t)|_t^2 = 2 E(t)``. A certificate bounds them as
``E(t) <= L exp(omega (t - s)) E(s)``; unsquared norms decay at ``omega / 2``
with prefactor ``sqrt(L)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence
import logging
import math

import numpy as np

from . import algebra
from ._settings import (
    DEFAULT_TAU_GRID_COUNT,
    TAU_GRID_LOWER_FACTOR,
    TAU_GRID_UPPER_FACTOR,
)
from .model.system import PHSystem
from .model.validation import (
    BOUNDARY_DISSIPATIVE,
    CONTRACTIVITY,
    ValidationReport,
    validate,
)

logger = logging.getLogger(__name__)

DISSIPATION = "boundary_dissipation"
OBSERVABILITY_WINDOW = "observability_window"


class CertificateError(RuntimeError):
    """A hypothesis of the decay theorem is not met; ``hypothesis`` names it."""

    def __init__(self, message: str, hypothesis: str = None):
        self.hypothesis = hypothesis
        super().__init__(message)


class ObservabilityWindowError(CertificateError):
    def __init__(self, tau: float, minimum: float):
        self.tau = tau
        self.minimum = minimum
        super().__init__(
            "observability window tau=%.6g is too short, it must exceed 2 gamma (b - a) = %.6g"
            % (tau, minimum),
            OBSERVABILITY_WINDOW,
        )


def _p1_inverse(system: PHSystem) -> np.ndarray:
    algebra.boundary_block_inverse(system.P1)
    return np.linalg.inv(system.P1)


def gamma_min(system: PHSystem) -> float:
    """gamma = |P1^-1| / m, so that +-P1^-1 + gamma H >= 0 whenever H >= m."""
    return algebra.spectral_norm(_p1_inverse(system)) / system.bounds.m


def gamma_holds(system: PHSystem, gamma: float) -> bool:
    """Check +-P1^-1 + gamma H >= 0 on the sample grid."""
    inverse = _p1_inverse(system)
    positions = system.sample_grid.positions(system.interval)
    for t in system.sample_grid.times():
        for h in system.H.sample(t, positions):
            for sign in (1.0, -1.0):
                form = algebra.hermitian_part(sign * inverse + gamma * h)
                verdict = algebra.psd_classify(form)
                if not verdict.is_psd:
                    logger.warning(
                        "gamma=%.6g fails at t=%.6g, eigenvalue %.6g",
                        gamma,
                        t,
                        verdict.min_eigenvalue,
                    )
                    return False
    return True


def kappa_tau(system: PHSystem) -> float:
    bounds = system.bounds
    inverse_norm = algebra.spectral_norm(_p1_inverse(system))
    p0_norm = algebra.spectral_norm(system.P0)
    return (2.0 * bounds.M * (p0_norm + bounds.K_max) * inverse_norm + bounds.L_zeta) / bounds.m


def kappa_tau_literal(system: PHSystem) -> float:
    """2 |P0* P1^-1| + L_zeta / m, without the M / m factor or the K term."""
    product = system.P0.conj().T @ _p1_inverse(system)
    return 2.0 * algebra.spectral_norm(product) + system.bounds.L_zeta / system.bounds.m


def c_T(system: PHSystem) -> float:
    bounds = system.bounds
    return (bounds.M_T + 2.0 * bounds.M * bounds.K_max) / bounds.m


def growth_constant(system: PHSystem, tau: float) -> float:
    """M_tau = exp(c_T tau / 2), the amplitude growth over one window."""
    return math.exp(0.5 * c_T(system) * tau)


def observability_constant(
    c_tau: float, kappa_tau: float, gamma: float, length: float, tau: float
) -> float:
    minimum = 2.0 * gamma * length
    if not tau > minimum:
        raise ObservabilityWindowError(tau, minimum)
    exponent = c_tau * tau + kappa_tau * length
    if exponent > 700.0:
        return math.inf
    return math.exp(exponent) * length / (tau - minimum)


def C_tau(system: PHSystem, tau: float) -> float:
    return observability_constant(
        c_T(system), kappa_tau(system), gamma_min(system), system.length, tau
    )


def refine_C_tau(C_tau0: float, tau0: float, M0: float, n: int):
    """Longer window n tau0 with constant M0^2 C_tau0 / n, for families bounded by M0."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer, got %s" % n)
    if M0 < 1:
        raise ValueError("M0 must be >= 1, got %s" % M0)
    if not C_tau0 > 0:
        raise ValueError("C_tau0 must be positive, got %s" % C_tau0)
    if not tau0 > 0:
        raise ValueError("tau0 must be positive, got %s" % tau0)
    return n * tau0, M0 ** 2 * C_tau0 / n


def default_tau_grid(system: PHSystem, count: int = DEFAULT_TAU_GRID_COUNT) -> np.ndarray:
    scale = gamma_min(system) * system.length
    return np.geomspace(
        2.0 * scale * TAU_GRID_LOWER_FACTOR, TAU_GRID_UPPER_FACTOR * scale, count
    )


def decay_rate(kappa: float, C: float, tau: float):
    """(rho_tau, omega) for one window."""
    rho = 1.0 / (1.0 + 2.0 * kappa / C)
    return rho, math.log(rho) / tau


@dataclass(frozen=True)
class StabilityCertificate:
    gamma: float
    kappa_tau: float
    c_T: float
    tau: float
    C_tau: float
    kappa: float
    rho_tau: float
    omega: float
    L: float
    amplitude_rate: float
    amplitude_prefactor: float
    length: float
    endpoint: str = "b"
    kappa_tau_literal: Optional[float] = None
    contractive: bool = True
    gamma_verified: Optional[bool] = None

    def __post_init__(self):
        if not self.tau > 2.0 * self.gamma * self.length:
            raise ValueError("certificate window tau=%s is not admissible" % self.tau)
        if not 0.0 < self.rho_tau < 1.0:
            raise ValueError("certificate rho_tau=%s outside (0, 1)" % self.rho_tau)
        if not self.omega < 0.0:
            raise ValueError("certificate omega=%s is not negative" % self.omega)
        if not self.L >= 1.0:
            raise ValueError("certificate L=%s is below 1" % self.L)

    def bound(self, t: float, s: float = 0.0) -> float:
        """Factor on E(s) that bounds E(t)."""
        return self.L * math.exp(self.omega * (t - s))

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "kappa_tau": self.kappa_tau,
            "kappa_tau_literal": self.kappa_tau_literal,
            "c_T": self.c_T,
            "tau": self.tau,
            "C_tau": self.C_tau,
            "kappa": self.kappa,
            "endpoint": self.endpoint,
            "rho_tau": self.rho_tau,
            "omega": self.omega,
            "L": self.L,
            "amplitude_rate": self.amplitude_rate,
            "amplitude_prefactor": self.amplitude_prefactor,
            "assumptions_used": {
                "contractive": self.contractive,
                "gamma_verified": self.gamma_verified,
            },
        }


def decay_certificate(
    system: PHSystem,
    kappa: float,
    tau_grid: Sequence[float] = None,
    report: ValidationReport = None,
    endpoint: str = "b",
) -> StabilityCertificate:
    """Best certificate over ``tau_grid``, the one with the most negative omega."""
    report = validate(system) if report is None else report
    if not report.contractive_ok:
        failing = [
            record.name
            for record in report.failures()
            if record.name in (CONTRACTIVITY, BOUNDARY_DISSIPATIVE)
        ]
        hypothesis = failing[0] if failing else CONTRACTIVITY
        raise CertificateError(
            "contractivity of the evolution family is not established (%s); "
            "without it decay can fail, see the transport counterexample. "
            "M_tau = exp(c_T tau / 2) per window is all that holds" % hypothesis,
            hypothesis,
        )
    if not kappa > 0.0:
        raise CertificateError(
            "boundary dissipation kappa=%.6g, no decay can be certified" % kappa,
            DISSIPATION,
        )

    gamma = gamma_min(system)
    growth = c_T(system)
    coupling = kappa_tau(system)
    length = system.length
    tau_grid = default_tau_grid(system) if tau_grid is None else tau_grid

    best = None
    for tau in sorted(float(value) for value in tau_grid):
        try:
            constant = observability_constant(growth, coupling, gamma, length, tau)
        except ObservabilityWindowError:
            logger.debug("skipping tau=%.6g, window too short", tau)
            continue
        if not math.isfinite(constant):
            continue
        rho, omega = decay_rate(kappa, constant, tau)
        # rho rounds to 1 when C_tau dwarfs kappa
        if not omega < 0.0:
            continue
        logger.debug("tau=%.6g C_tau=%.6g rho=%.6g omega=%.6g", tau, constant, rho, omega)
        if best is None or omega < best[3]:
            best = (tau, constant, rho, omega)
    if best is None:
        raise ObservabilityWindowError(
            max(float(value) for value in tau_grid) if len(tau_grid) else 0.0,
            2.0 * gamma * length,
        )

    tau, constant, rho, omega = best
    L = system.bounds.M / (system.bounds.m * rho)
    return StabilityCertificate(
        gamma=gamma,
        kappa_tau=coupling,
        c_T=growth,
        tau=tau,
        C_tau=constant,
        kappa=float(kappa),
        rho_tau=rho,
        omega=omega,
        L=L,
        amplitude_rate=0.5 * omega,
        amplitude_prefactor=math.sqrt(L),
        length=length,
        endpoint=endpoint,
        kappa_tau_literal=kappa_tau_literal(system),
        contractive=True,
        gamma_verified=gamma_holds(system, gamma),
    )


def certificate_table(system: PHSystem, kappa: float, tau_grid: Sequence[float]) -> List[dict]:
    """Per-tau constants, for reports; inadmissible windows are listed with C_tau None."""
    gamma = gamma_min(system)
    growth = c_T(system)
    coupling = kappa_tau(system)
    rows = []
    for tau in tau_grid:
        tau = float(tau)
        try:
            constant = observability_constant(growth, coupling, gamma, system.length, tau)
        except ObservabilityWindowError:
            rows.append({"tau": tau, "C_tau": None, "rho_tau": None, "omega": None})
            continue
        rho, omega = decay_rate(kappa, constant, tau) if kappa > 0 else (1.0, 0.0)
        rows.append({"tau": tau, "C_tau": constant, "rho_tau": rho, "omega": omega})
    return rows
