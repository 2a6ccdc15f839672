"""Post-processing of trajectories: fitted decay rates and the energy inequalities.

Every pairwise check uses energies E(t) = |x(t)|_t^2 / 2. Pairs whose earlier
energy is below ``LOG_ENERGY_GUARD`` times the largest recorded energy are
skipped; ratios between round-off sized energies carry no information.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple
import logging
import math

import numpy as np
from scipy.integrate import trapezoid

from . import certificates
from ._settings import (
    CONTRACTION_SLACK_PER_TIME,
    DATKO_TAIL_FRACTION,
    LOG_ENERGY_GUARD,
    MIN_FIT_POINTS,
    OBSERVABILITY_WINDOWS,
    PDE_SLACK,
)
from .certificates import StabilityCertificate
from .model.system import PHSystem
from .solver.trajectory import Trajectory

logger = logging.getLogger(__name__)


@dataclass
class DecayFit:
    omega_hat: float
    L_hat: float
    residual: float
    window: Tuple[float, float]
    points: int

    def as_dict(self) -> dict:
        return {
            "omega_hat": self.omega_hat,
            "L_hat": self.L_hat,
            "residual": self.residual,
            "window": list(self.window),
            "points": self.points,
        }


@dataclass
class InequalityReport:
    name: str
    pairs_checked: int
    worst_ratio: float
    slack: float
    passed: bool
    witness: Optional[Tuple[float, float]] = None
    rows: List[Tuple[float, float, float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "pairs_checked": self.pairs_checked,
            "worst_ratio": self.worst_ratio,
            "slack": self.slack,
            "passed": self.passed,
            "witness": None if self.witness is None else list(self.witness),
        }


@dataclass
class DatkoIndicator:
    value: float
    p: float
    tail_ratio: float
    inconclusive: bool

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "tail_ratio": self.tail_ratio,
            "inconclusive": self.inconclusive,
        }


def decay_fit_series(times, energies, window: Tuple[float, float] = None) -> DecayFit:
    """Least squares line through (t, ln E) on the energies above the log guard."""
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if window is not None:
        inside = (times >= window[0]) & (times <= window[1])
        times, energies = times[inside], energies[inside]
    valid = energies > LOG_ENERGY_GUARD
    if np.count_nonzero(valid) < MIN_FIT_POINTS:
        raise ValueError(
            "decay fit needs at least %d energies above %.0e, got %d"
            % (MIN_FIT_POINTS, LOG_ENERGY_GUARD, np.count_nonzero(valid))
        )
    times, logs = times[valid], np.log(energies[valid])
    slope, intercept = np.polyfit(times, logs, 1)
    residual = float(np.sqrt(np.mean((logs - (slope * times + intercept)) ** 2)))
    t0 = times[0]
    L_hat = math.exp(intercept + slope * t0 - logs[0])
    return DecayFit(
        omega_hat=float(slope),
        L_hat=float(L_hat),
        residual=residual,
        window=(float(t0), float(times[-1])),
        points=int(times.size),
    )


def decay_fit(trajectory: Trajectory, window: Tuple[float, float] = None) -> DecayFit:
    return decay_fit_series(trajectory.times, trajectory.energies, window)


def _check_pairs(name, times, energies, bound, slack, min_gap=0.0) -> InequalityReport:
    """Worst E(t) / (bound(t - s) E(s)) over recorded pairs s < t with t - s >= min_gap."""
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    gaps = times[None, :] - times[:, None]
    usable = energies > LOG_ENERGY_GUARD * max(float(np.max(energies)), np.finfo(float).tiny)
    mask = (gaps > 0) & (gaps >= min_gap) & usable[:, None]
    pairs = int(np.count_nonzero(mask))
    if pairs == 0:
        return InequalityReport(name, 0, 0.0, slack, True)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        allowed = bound(np.where(mask, gaps, 0.0)) * energies[:, None]
        ratios = np.where(mask, energies[None, :] / allowed, -np.inf)
    worst = np.unravel_index(np.argmax(ratios), ratios.shape)
    worst_ratio = float(ratios[worst])
    passed = worst_ratio <= 1.0 + slack
    if not passed:
        logger.info(
            "%s fails: ratio %.6g at s=%.6g, t=%.6g",
            name,
            worst_ratio,
            times[worst[0]],
            times[worst[1]],
        )
    return InequalityReport(
        name,
        pairs,
        worst_ratio,
        slack,
        passed,
        witness=(float(times[worst[0]]), float(times[worst[1]])),
    )


def check_growth_bound(trajectory: Trajectory, c_T: float, slack: float = PDE_SLACK) -> InequalityReport:
    """E(t) <= exp(c_T (t - s)) E(s) on all recorded pairs."""
    return _check_pairs(
        "growth_bound",
        trajectory.times,
        trajectory.energies,
        lambda gap: np.exp(c_T * gap),
        slack,
    )


def check_contraction(
    trajectory: Trajectory, slack_per_time: float = CONTRACTION_SLACK_PER_TIME
) -> InequalityReport:
    """E(t) <= (1 + slack_per_time (t - s)) E(s); the reported slack is zero."""
    return _check_pairs(
        "contraction",
        trajectory.times,
        trajectory.energies,
        lambda gap: 1.0 + slack_per_time * gap,
        0.0,
    )


def _window_integral(times, values, start, end) -> float:
    inside = (times > start) & (times < end)
    points = np.concatenate([[start], times[inside], [end]])
    samples = np.interp(points, times, values)
    return float(trapezoid(samples, points))


def check_observability(
    trajectory: Trajectory,
    system: PHSystem,
    tau: float,
    endpoint: str = "b",
    windows: int = OBSERVABILITY_WINDOWS,
    slack: float = PDE_SLACK,
    C: float = None,
) -> InequalityReport:
    """|x(s + tau)|^2 <= C_tau int_s^{s + tau} |(Hx)(t, endpoint)|^2 dt for ``windows`` starts s."""
    C = certificates.C_tau(system, tau) if C is None else C
    t_start, t_end = float(trajectory.trace_times[0]), float(trajectory.trace_times[-1])
    if t_end - t_start < tau:
        raise ValueError(
            "trajectory covers %.6g time units, the window needs %.6g" % (t_end - t_start, tau)
        )
    starts = np.linspace(t_start, t_end - tau, windows)
    trace = trajectory.trace_norms_squared(endpoint)
    rows = []
    worst_ratio, witness = 0.0, None
    for s in starts:
        lhs = 2.0 * float(trajectory.energy_at(s + tau))
        rhs = C * _window_integral(trajectory.trace_times, trace, s, s + tau)
        if rhs > 0.0:
            ratio = lhs / rhs
        else:
            ratio = 0.0 if lhs == 0.0 else math.inf
        rows.append((float(s), lhs, rhs))
        if witness is None or ratio > worst_ratio:
            worst_ratio, witness = ratio, (float(s), float(s + tau))
    return InequalityReport(
        "observability_%s" % endpoint,
        len(starts),
        worst_ratio,
        slack,
        worst_ratio <= 1.0 + slack,
        witness=witness,
        rows=rows,
    )


def datko_indicator(trajectory: Trajectory, p: float = 2.0) -> DatkoIndicator:
    """int |x(t)|^p dt / |x(t0)|^p over the recorded times."""
    if not p > 0:
        raise ValueError("p must be positive, got %s" % p)
    norms = np.sqrt(trajectory.norms_squared)
    initial = norms[0]
    if initial == 0.0:
        return DatkoIndicator(0.0, p, 0.0, False)
    value = float(trapezoid(norms ** p, trajectory.times)) / initial ** p
    tail_ratio = float(trajectory.energies[-1] / trajectory.energies[0])
    inconclusive = tail_ratio >= DATKO_TAIL_FRACTION
    if inconclusive:
        logger.info("energy tail %.3e of the initial energy, indicator inconclusive", tail_ratio)
    return DatkoIndicator(value, p, tail_ratio, inconclusive)


def compare_certificate(
    trajectory: Trajectory, certificate: StabilityCertificate, slack: float = PDE_SLACK
) -> dict:
    """Certified against fitted decay, and E(t) <= L exp(omega (t - s)) E(s) for t - s >= tau."""
    soundness = _check_pairs(
        "certificate_soundness",
        trajectory.times,
        trajectory.energies,
        lambda gap: certificate.L * np.exp(certificate.omega * gap),
        slack,
        min_gap=certificate.tau,
    )
    try:
        fit = decay_fit(trajectory)
    except ValueError as err:
        logger.info("no decay fit: %s", err)
        fit = None
    return {
        "certified": {
            "omega": certificate.omega,
            "L": certificate.L,
            "amplitude_rate": certificate.amplitude_rate,
            "tau": certificate.tau,
        },
        "fitted": None if fit is None else fit.as_dict(),
        "soundness": soundness.as_dict(),
        "at_least_as_fast": None if fit is None else fit.omega_hat <= certificate.omega,
        "tightness_gap": None if fit is None else certificate.omega - fit.omega_hat,
    }
