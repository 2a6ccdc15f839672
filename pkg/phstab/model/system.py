from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple
import hashlib
import json
import logging

import numpy as np

from .. import algebra
from .._settings import (
    DEFAULT_SAMPLE_GRID,
    DEFAULT_T_HORIZON,
    SAMPLED_BOUND_INFLATION,
    SAMPLED_MINIMUM_WARNING_FRACTION,
    TIME_DIFFERENCE_STEP,
    ZETA_DIFFERENCE_STEP,
    TRACE_ORDERS,
)
from .fields import CoefficientField

logger = logging.getLogger(__name__)

DECLARED = "declared"
CLOSED_FORM = "closed_form"
SAMPLED = "sampled"

BOUND_NAMES = ("m", "M", "M_T", "L_zeta", "K_max")


@dataclass(frozen=True)
class DeclaredBounds:
    m: Optional[float] = None
    M: Optional[float] = None
    M_T: Optional[float] = None
    L_zeta: Optional[float] = None
    K_max: Optional[float] = None

    def __post_init__(self):
        for name in BOUND_NAMES:
            value = getattr(self, name)
            if value is not None and (not np.isfinite(value) or value < 0):
                raise ValueError("declared bound %s must be finite and >= 0, got %s" % (name, value))
        if self.m is not None and self.m <= 0:
            raise ValueError("declared m must be positive, got %s" % self.m)
        if self.m is not None and self.M is not None and self.m > self.M:
            raise ValueError("declared m=%s exceeds declared M=%s" % (self.m, self.M))


@dataclass(frozen=True)
class ResolvedBounds:
    m: float
    M: float
    M_T: float
    L_zeta: float
    K_max: float
    sources: Dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        values = {name: float(getattr(self, name)) for name in BOUND_NAMES}
        values["sources"] = dict(self.sources)
        return values


@dataclass(frozen=True)
class SampleGrid:
    t_count: int
    zeta_count: int
    t_horizon: float

    def __post_init__(self):
        if self.t_count < 2 or self.zeta_count < 2:
            raise ValueError(
                "sample grid needs at least 2 points per axis, got (%d, %d)"
                % (self.t_count, self.zeta_count)
            )
        if not self.t_horizon > 0:
            raise ValueError("t_horizon must be positive, got %s" % self.t_horizon)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_horizon, self.t_count)

    def positions(self, interval) -> np.ndarray:
        return np.linspace(interval[0], interval[1], self.zeta_count)


def default_sample_grid() -> SampleGrid:
    return SampleGrid(DEFAULT_SAMPLE_GRID[0], DEFAULT_SAMPLE_GRID[1], DEFAULT_T_HORIZON)


@dataclass(frozen=True, eq=False)
class PHSystem:
    """Port-Hamiltonian system dx/dt = (P1 d/dzeta + P0)(H x) + K x on (a, b).

    ``W_tilde_B`` acts on the trace vector ((Hx)(b), (Hx)(a)).
    """

    n: int
    interval: Tuple[float, float]
    P0: np.ndarray
    P1: np.ndarray
    W_tilde_B: np.ndarray
    H: CoefficientField
    K: CoefficientField
    bounds: ResolvedBounds
    sample_grid: SampleGrid
    name: str = "custom"
    declared: DeclaredBounds = DeclaredBounds()

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    def endpoint(self, which: str) -> float:
        if which not in ("a", "b"):
            raise ValueError("endpoint must be 'a' or 'b', got %s" % which)
        return self.interval[0] if which == "a" else self.interval[1]

    @property
    def W_B(self) -> np.ndarray:
        return algebra.compute_WB(self.W_tilde_B, self.P1)

    def is_autonomous(self) -> bool:
        return not self.H.depends_on_time() and not self.K.depends_on_time()

    def time_reversed(self) -> "PHSystem":
        """The system run backwards in time: P1, P0 and K change sign."""
        if not self.is_autonomous():
            raise ValueError("time reversal needs time independent coefficients")
        return replace(
            self,
            P0=-self.P0,
            P1=-self.P1,
            K=self.K if self.K.is_zero() else self.K.negated(),
            name="%s-reversed" % self.name,
        )

    def describe(self) -> dict:
        def matrix(m):
            m = np.asarray(m, dtype=complex)
            description = {"real": m.real.tolist()}
            if np.any(m.imag != 0):
                description["imag"] = m.imag.tolist()
            return description

        return {
            "name": self.name,
            "n": self.n,
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "trace_order": "ba",
            "P0": matrix(self.P0),
            "P1": matrix(self.P1),
            "W_tilde_B": matrix(self.W_tilde_B),
            "H": self.H.to_sources(),
            "K": self.K.to_sources(),
            "bounds": self.bounds.as_dict(),
        }

    def fingerprint(self) -> str:
        payload = json.dumps(self.describe(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def build_system(
    interval,
    P0,
    P1,
    W_tilde_B,
    H: CoefficientField,
    K: CoefficientField = None,
    declared: DeclaredBounds = None,
    trace_order: str = "ba",
    sample_grid: SampleGrid = None,
    name: str = "custom",
) -> PHSystem:
    a, b = float(interval[0]), float(interval[1])
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ValueError("interval must satisfy a < b, got (%s, %s)" % (a, b))
    P0 = algebra.as_matrix(P0, "P0")
    P1 = algebra.as_matrix(P1, "P1")
    W_tilde_B = algebra.as_matrix(W_tilde_B, "W_tilde_B")
    n = P1.shape[0]
    if P1.shape != (n, n) or P0.shape != (n, n):
        raise ValueError("P0 and P1 must both be %dx%d" % (n, n))
    if W_tilde_B.shape != (n, 2 * n):
        raise ValueError(
            "W_tilde_B must be %dx%d, got %dx%d" % ((n, 2 * n) + W_tilde_B.shape)
        )
    if trace_order not in TRACE_ORDERS:
        raise ValueError("Invalid trace order %s, must be one of %s" % (trace_order, TRACE_ORDERS))
    if trace_order == "ab":
        W_tilde_B = np.hstack([W_tilde_B[:, n:], W_tilde_B[:, :n]])
    if H.n != n:
        raise ValueError("H must be %dx%d, got %dx%d" % (n, n, H.n, H.n))
    K = CoefficientField.zero(n) if K is None else K
    if K.n != n:
        raise ValueError("K must be %dx%d, got %dx%d" % (n, n, K.n, K.n))
    declared = DeclaredBounds() if declared is None else declared
    sample_grid = default_sample_grid() if sample_grid is None else sample_grid
    bounds = resolve_bounds(H, K, (a, b), declared, sample_grid)
    return PHSystem(
        n=n,
        interval=(a, b),
        P0=P0,
        P1=P1,
        W_tilde_B=W_tilde_B,
        H=H,
        K=K,
        bounds=bounds,
        sample_grid=sample_grid,
        name=name,
        declared=declared,
    )


def time_derivative(field_: CoefficientField, t: float, zeta: np.ndarray) -> np.ndarray:
    """Central difference in t (forward at the start of time)."""
    step = TIME_DIFFERENCE_STEP
    if t >= step:
        return (field_.sample(t + step, zeta) - field_.sample(t - step, zeta)) / (2 * step)
    return (field_.sample(t + step, zeta) - field_.sample(t, zeta)) / step


def zeta_derivative(
    field_: CoefficientField, t: float, zeta: np.ndarray, interval
) -> np.ndarray:
    """Central difference in zeta, one sided at the ends of the interval."""
    step = ZETA_DIFFERENCE_STEP * (interval[1] - interval[0])
    lower = np.maximum(zeta - step, interval[0])
    upper = np.minimum(zeta + step, interval[1])
    return (field_.sample(t, upper) - field_.sample(t, lower)) / (upper - lower)[
        :, None, None
    ]


def _max_norm(matrices: np.ndarray) -> float:
    return max(algebra.spectral_norm(matrix) for matrix in matrices) if len(matrices) else 0.0


def resolve_bounds(
    H: CoefficientField,
    K: CoefficientField,
    interval,
    declared: DeclaredBounds,
    sample_grid: SampleGrid,
) -> ResolvedBounds:
    """Fill each bound from the declaration, a closed form, or inflated samples."""
    times = sample_grid.times()
    positions = sample_grid.positions(interval)
    inflate = 1.0 + SAMPLED_BOUND_INFLATION
    values = {}
    sources = {}

    field_low, field_high = H.declared_bounds or (None, None)
    declared_low = declared.m if declared.m is not None else field_low
    declared_high = declared.M if declared.M is not None else field_high
    if declared_low is not None and declared_high is not None:
        values["m"], values["M"] = declared_low, declared_high
        sources["m"] = sources["M"] = DECLARED
    else:
        if H.is_constant():
            eigenvalues = algebra.hermitian_eigenvalues(algebra.hermitian_part(H.at(0.0, interval[0])))
            low, high, source = eigenvalues[0], eigenvalues[-1], CLOSED_FORM
        else:
            low, high = np.inf, -np.inf
            for t in times:
                for matrix in H.sample(t, positions):
                    eigenvalues = algebra.hermitian_eigenvalues(algebra.hermitian_part(matrix))
                    low = min(low, eigenvalues[0])
                    high = max(high, eigenvalues[-1])
            if declared_low is None and low < SAMPLED_MINIMUM_WARNING_FRACTION * high:
                logger.warning(
                    "sampled minimum eigenvalue of H is %.4g against a maximum of %.4g; "
                    "the sample grid may miss where H degenerates, declare m to be sure",
                    low,
                    high,
                )
            low, high, source = low * (1.0 - SAMPLED_BOUND_INFLATION), high * inflate, SAMPLED
        values["m"] = declared_low if declared_low is not None else float(low)
        values["M"] = declared_high if declared_high is not None else float(high)
        sources["m"] = DECLARED if declared_low is not None else source
        sources["M"] = DECLARED if declared_high is not None else source

    declared_rate = (
        declared.M_T if declared.M_T is not None else H.declared_time_derivative_bound
    )
    if declared_rate is not None:
        values["M_T"], sources["M_T"] = declared_rate, DECLARED
    elif not H.depends_on_time():
        values["M_T"], sources["M_T"] = 0.0, CLOSED_FORM
    else:
        rate = max(_max_norm(time_derivative(H, t, positions)) for t in times)
        values["M_T"], sources["M_T"] = rate * inflate, SAMPLED

    declared_lipschitz = (
        declared.L_zeta if declared.L_zeta is not None else H.declared_zeta_lipschitz
    )
    if declared_lipschitz is not None:
        values["L_zeta"], sources["L_zeta"] = declared_lipschitz, DECLARED
    elif not H.depends_on_zeta():
        values["L_zeta"], sources["L_zeta"] = 0.0, CLOSED_FORM
    else:
        slope = max(_max_norm(zeta_derivative(H, t, positions, interval)) for t in times)
        values["L_zeta"], sources["L_zeta"] = slope * inflate, SAMPLED

    if declared.K_max is not None:
        values["K_max"], sources["K_max"] = declared.K_max, DECLARED
    elif K.is_zero():
        values["K_max"], sources["K_max"] = 0.0, CLOSED_FORM
    elif K.is_constant():
        values["K_max"] = algebra.spectral_norm(K.at(0.0, interval[0]))
        sources["K_max"] = CLOSED_FORM
    else:
        size = max(_max_norm(K.sample(t, positions)) for t in times)
        values["K_max"], sources["K_max"] = size * inflate, SAMPLED

    logger.debug("resolved bounds %s from %s", values, sources)
    return ResolvedBounds(sources=sources, **{k: float(v) for k, v in values.items()})
