"""Hypothesis checks on a system and the boundary dissipation constant."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple
import logging

import numpy as np
import scipy.linalg

from .. import algebra
from .._settings import (
    FIELD_HERMITIAN_TOLERANCE,
    KAPPA_BISECTION_TOLERANCE,
    KAPPA_FEASIBILITY_TOLERANCE,
)
from .system import PHSystem, SampleGrid, time_derivative

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
UNKNOWN = "unknown"

DISSIPATIVE_PORT = "re_p0_nonpositive"
HERMITIAN_P1 = "p1_hermitian_invertible"
BOUNDARY_RANK = "boundary_rank"
BOUNDARY_DISSIPATIVE = "wb_sigma_wbstar_psd"
COERCIVE_HAMILTONIAN = "hamiltonian_coercive"
FINITE_PERTURBATION = "perturbation_finite"
CONTRACTIVITY = "contractivity_constraint"

GENERATOR_HYPOTHESES = (
    DISSIPATIVE_PORT,
    HERMITIAN_P1,
    BOUNDARY_RANK,
    BOUNDARY_DISSIPATIVE,
    COERCIVE_HAMILTONIAN,
    FINITE_PERTURBATION,
)
CONTRACTIVE_HYPOTHESES = (BOUNDARY_DISSIPATIVE, CONTRACTIVITY)


@dataclass
class HypothesisRecord:
    name: str
    verdict: str
    detail: str = ""
    witness_t: Optional[float] = None
    witness_zeta: Optional[float] = None
    witness_eigenvalue: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "detail": self.detail,
            "witness": None
            if self.verdict == PASS
            else {
                "t": self.witness_t,
                "zeta": self.witness_zeta,
                "eigenvalue": self.witness_eigenvalue,
            },
        }


@dataclass
class ValidationReport:
    records: List[HypothesisRecord] = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    sampled_eigenvalue_range: Tuple[float, float] = (np.nan, np.nan)

    def record(self, name: str) -> HypothesisRecord:
        for record in self.records:
            if record.name == name:
                return record
        raise KeyError(name)

    def _all_pass(self, names) -> bool:
        return all(self.record(name).verdict == PASS for name in names)

    @property
    def generator_ok(self) -> bool:
        return self._all_pass(GENERATOR_HYPOTHESES)

    @property
    def contractive_ok(self) -> bool:
        return self._all_pass(CONTRACTIVE_HYPOTHESES)

    def failures(self) -> List[HypothesisRecord]:
        return [record for record in self.records if record.verdict != PASS]

    def as_dict(self) -> dict:
        return {
            "generator_ok": self.generator_ok,
            "contractive_ok": self.contractive_ok,
            "hypotheses": [record.as_dict() for record in self.records],
            "bounds": self.bounds,
            "sampled_eigenvalue_range": [float(v) for v in self.sampled_eigenvalue_range],
        }


def kernel_basis(wtilde) -> np.ndarray:
    """Orthonormal basis (2n x n) of the trace constraint set ker W_tilde_B."""
    wtilde = algebra.as_matrix(wtilde, "W_tilde_B")
    n = wtilde.shape[0]
    if wtilde.shape[1] != 2 * n:
        raise ValueError("W_tilde_B must be n x 2n, got %dx%d" % wtilde.shape)
    found = algebra.rank(wtilde)
    if found != n:
        raise np.linalg.LinAlgError("W_tilde_B has rank %d, expected %d" % (found, n))
    basis = scipy.linalg.null_space(wtilde)
    if basis.shape[1] != n:
        raise np.linalg.LinAlgError(
            "kernel of W_tilde_B has dimension %d, expected %d" % (basis.shape[1], n)
        )
    residual = np.linalg.norm(wtilde @ basis)
    if residual > 1e-11 * max(1.0, np.linalg.norm(wtilde)):
        raise np.linalg.LinAlgError("kernel basis residual %.3e too large" % residual)
    return basis


def trace_projector(wtilde) -> np.ndarray:
    basis = kernel_basis(wtilde)
    return basis @ basis.conj().T


def _endpoint_selector(n: int, endpoint: str) -> np.ndarray:
    selector = np.zeros((2 * n, 2 * n))
    if endpoint == "b":
        selector[:n, :n] = np.eye(n)
    elif endpoint == "a":
        selector[n:, n:] = np.eye(n)
    else:
        raise ValueError("endpoint must be 'a' or 'b', got %s" % endpoint)
    return selector


def boundary_dissipation_kappa(system: PHSystem, endpoint: str = "b") -> float:
    """Largest kappa >= 0 with 1/2 (u_b* P1 u_b - u_a* P1 u_a) <= -kappa |u_endpoint|^2 on ker W_tilde_B."""
    n = system.n
    basis = kernel_basis(system.W_tilde_B)
    port = 0.5 * np.block(
        [[system.P1, np.zeros((n, n))], [np.zeros((n, n)), -system.P1]]
    )
    selector = _endpoint_selector(n, endpoint)

    def feasible(kappa: float) -> bool:
        form = basis.conj().T @ (port + kappa * selector) @ basis
        verdict = algebra.psd_classify(algebra.hermitian_part(form), KAPPA_FEASIBILITY_TOLERANCE)
        return verdict.is_nsd

    if not feasible(0.0):
        logger.info("boundary form is not dissipative, kappa = 0")
        return 0.0
    low = 0.0
    high = algebra.spectral_norm(system.P1) / system.bounds.m
    if feasible(high):
        return float(high)
    while high - low > KAPPA_BISECTION_TOLERANCE:
        middle = 0.5 * (low + high)
        if feasible(middle):
            low = middle
        else:
            high = middle
    return float(low)


def h_weighted_kappa(
    system: PHSystem, kappa: float, endpoint: str = "b", times=None
) -> List[Tuple[float, float]]:
    """kappa scaled by lambda_min(H(t, endpoint))^2 on the sample times.

    ``|u|^2 >= lambda_min^2 |x|^2`` for ``u = H x`` turns a bound in the trace of
    Hx into one in the trace of x.
    """
    times = system.sample_grid.times() if times is None else times
    position = system.endpoint(endpoint)
    rows = []
    for t in times:
        eigenvalues = algebra.hermitian_eigenvalues(algebra.hermitian_part(system.H.at(t, position)))
        rows.append((float(t), float(kappa * eigenvalues[0] ** 2)))
    return rows


def _check_ports(system: PHSystem, report: ValidationReport) -> bool:
    verdict = algebra.psd_classify(algebra.hermitian_part(system.P0))
    if verdict.is_nsd:
        report.records.append(HypothesisRecord(DISSIPATIVE_PORT, PASS, "Re P0 <= 0"))
    else:
        report.records.append(
            HypothesisRecord(
                DISSIPATIVE_PORT,
                FAIL,
                "Re P0 has positive eigenvalue %.6g" % verdict.max_eigenvalue,
                witness_eigenvalue=verdict.max_eigenvalue,
            )
        )

    p1 = system.P1
    try:
        algebra.boundary_block_inverse(p1)
    except (ValueError, np.linalg.LinAlgError) as err:
        report.records.append(HypothesisRecord(HERMITIAN_P1, FAIL, str(err)))
        return False
    report.records.append(HypothesisRecord(HERMITIAN_P1, PASS, "P1 = P1*, invertible"))
    return True


def _check_boundary(system: PHSystem, report: ValidationReport, p1_ok: bool) -> None:
    found = algebra.rank(system.W_tilde_B)
    if found == system.n:
        report.records.append(HypothesisRecord(BOUNDARY_RANK, PASS, "rank %d" % found))
    else:
        report.records.append(
            HypothesisRecord(
                BOUNDARY_RANK, FAIL, "rank W_tilde_B = %d, expected %d" % (found, system.n)
            )
        )
    if not p1_ok:
        report.records.append(
            HypothesisRecord(BOUNDARY_DISSIPATIVE, UNKNOWN, "W_B needs an invertible P1")
        )
        return
    product = algebra.wb_sigma_wbstar(system.W_B)
    verdict = algebra.psd_classify(product)
    if verdict.is_psd:
        report.records.append(
            HypothesisRecord(BOUNDARY_DISSIPATIVE, PASS, "W_B Sigma W_B* >= 0")
        )
    else:
        report.records.append(
            HypothesisRecord(
                BOUNDARY_DISSIPATIVE,
                FAIL,
                "W_B Sigma W_B* has eigenvalue %.6g" % verdict.min_eigenvalue,
                witness_eigenvalue=verdict.min_eigenvalue,
            )
        )


def _check_fields(system: PHSystem, report: ValidationReport) -> None:
    bounds = system.bounds
    times = system.sample_grid.times()
    positions = system.sample_grid.positions(system.interval)
    lowest = (np.inf, None, None)
    highest = (-np.inf, None, None)
    asymmetry = (0.0, None, None)
    worst_constraint = (-np.inf, None, None)
    k_finite = True
    k_witness = (None, None)

    for t in times:
        h_values = system.H.sample(t, positions)
        k_values = system.K.sample(t, positions)
        dh_values = (
            time_derivative(system.H, t, positions)
            if system.H.depends_on_time()
            else np.zeros_like(h_values)
        )
        for index, zeta in enumerate(positions):
            h = h_values[index]
            gap = np.linalg.norm(h - h.conj().T)
            if gap > asymmetry[0]:
                asymmetry = (gap, t, zeta)
            eigenvalues = algebra.hermitian_eigenvalues(algebra.hermitian_part(h))
            if eigenvalues[0] < lowest[0]:
                lowest = (eigenvalues[0], t, zeta)
            if eigenvalues[-1] > highest[0]:
                highest = (eigenvalues[-1], t, zeta)

            k = k_values[index]
            if not np.all(np.isfinite(k)):
                k_finite = False
                k_witness = (t, zeta)
                continue
            constraint = h @ k + k.conj().T @ h + dh_values[index]
            top = algebra.hermitian_eigenvalues(algebra.hermitian_part(constraint))[-1]
            if top > worst_constraint[0]:
                worst_constraint = (top, t, zeta)

    report.sampled_eigenvalue_range = (float(lowest[0]), float(highest[0]))
    scale = max(1.0, abs(highest[0]))
    if asymmetry[0] > FIELD_HERMITIAN_TOLERANCE * scale:
        report.records.append(
            HypothesisRecord(
                COERCIVE_HAMILTONIAN,
                FAIL,
                "H is not Hermitian, |H - H*| = %.3e" % asymmetry[0],
                witness_t=float(asymmetry[1]),
                witness_zeta=float(asymmetry[2]),
            )
        )
    elif lowest[0] <= 0 or lowest[0] < bounds.m - FIELD_HERMITIAN_TOLERANCE * scale:
        report.records.append(
            HypothesisRecord(
                COERCIVE_HAMILTONIAN,
                FAIL,
                "H eigenvalue %.6g below m = %.6g" % (lowest[0], bounds.m),
                witness_t=float(lowest[1]),
                witness_zeta=float(lowest[2]),
                witness_eigenvalue=float(lowest[0]),
            )
        )
    elif highest[0] > bounds.M + FIELD_HERMITIAN_TOLERANCE * scale:
        report.records.append(
            HypothesisRecord(
                COERCIVE_HAMILTONIAN,
                FAIL,
                "H eigenvalue %.6g above M = %.6g" % (highest[0], bounds.M),
                witness_t=float(highest[1]),
                witness_zeta=float(highest[2]),
                witness_eigenvalue=float(highest[0]),
            )
        )
    else:
        report.records.append(
            HypothesisRecord(
                COERCIVE_HAMILTONIAN,
                PASS,
                "%.6g <= H <= %.6g" % (bounds.m, bounds.M),
            )
        )

    if k_finite:
        report.records.append(HypothesisRecord(FINITE_PERTURBATION, PASS, "K finite"))
    else:
        report.records.append(
            HypothesisRecord(
                FINITE_PERTURBATION,
                FAIL,
                "K has non-finite entries",
                witness_t=float(k_witness[0]),
                witness_zeta=float(k_witness[1]),
            )
        )

    band = FIELD_HERMITIAN_TOLERANCE * scale
    if not k_finite:
        report.records.append(
            HypothesisRecord(CONTRACTIVITY, UNKNOWN, "K is not finite on the grid")
        )
    elif worst_constraint[0] <= band:
        report.records.append(
            HypothesisRecord(CONTRACTIVITY, PASS, "H K + K* H + dH/dt <= 0")
        )
    else:
        report.records.append(
            HypothesisRecord(
                CONTRACTIVITY,
                FAIL,
                "H K + K* H + dH/dt has eigenvalue %.6g" % worst_constraint[0],
                witness_t=float(worst_constraint[1]),
                witness_zeta=float(worst_constraint[2]),
                witness_eigenvalue=float(worst_constraint[0]),
            )
        )


def validate(system: PHSystem, sample_grid: SampleGrid = None) -> ValidationReport:
    """Check the well-posedness hypotheses and the contractivity conditions.

    The sample grid defaults to the one the system's bounds were resolved on.
    """
    if sample_grid is not None and sample_grid != system.sample_grid:
        system = replace(system, sample_grid=sample_grid)
    report = ValidationReport(bounds=system.bounds.as_dict())
    p1_ok = _check_ports(system, report)
    _check_boundary(system, report, p1_ok)
    _check_fields(system, report)
    for record in report.failures():
        logger.info("hypothesis %s: %s (%s)", record.name, record.verdict, record.detail)
    return report
