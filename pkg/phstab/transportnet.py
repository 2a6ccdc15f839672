"""Exact solver for two coupled transport lines with piecewise constant speeds.

Line j carries ``d/dt x_j = h_j(t) d/dzeta x_j`` on [0, 1], so content moves
towards zeta = 0 and leaves there. What leaves one line enters the other at
zeta = 1::

    h_2(t) x_2(t, 1) = h_1(t) x_1(t, 0)
    h_1(t) x_1(t, 1) = alpha h_2(t) x_2(t, 0)

Speeds are periodic and piecewise constant in time, so piecewise constant
initial data stays piecewise constant. Breakpoints in time and space are exact
rationals; only the profile values are floats.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ._settings import (
    MAX_PERIODS,
    GROWTH_SLOPE_THRESHOLD,
    RIEMANN_SAMPLES,
    RIEMANN_AGREEMENT,
)

logger = logging.getLogger(__name__)

DECAYING = "decaying"
BOUNDED = "bounded"
GROWING = "growing"

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value) -> Fraction:
    """Exact rational from an int, a Fraction, a decimal string or a float's shortest repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a time or a position")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite value %s" % value)
        return Fraction(repr(value))
    return Fraction(str(value))


def _check_line(line: int) -> int:
    if line not in (1, 2):
        raise ValueError("line must be 1 or 2, got %s" % line)
    return line - 1


@dataclass(frozen=True)
class SpeedSchedule:
    """Periodic speeds: segment i starts at ``breakpoints[i]`` and runs at ``speeds[i]``."""

    period: Fraction
    breakpoints: Tuple[Fraction, ...]
    speeds: Tuple[Tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive, got %s" % self.period)
        if not self.breakpoints or self.breakpoints[0] != 0:
            raise ValueError("the first breakpoint must be 0")
        for earlier, later in zip(self.breakpoints, self.breakpoints[1:]):
            if not earlier < later:
                raise ValueError("breakpoints must be strictly increasing")
        if self.breakpoints[-1] >= self.period:
            raise ValueError("breakpoints must lie in [0, period)")
        if len(self.speeds) != len(self.breakpoints):
            raise ValueError(
                "expected %d speed pairs, got %d" % (len(self.breakpoints), len(self.speeds))
            )
        for pair in self.speeds:
            if len(pair) != 2 or min(pair) <= 0:
                raise ValueError("speeds must be positive pairs (h1, h2), got %s" % (pair,))

    @classmethod
    def from_segments(cls, period, segments: Sequence[Tuple]) -> "SpeedSchedule":
        """``segments`` holds (start, h1, h2) triples."""
        return cls(
            as_fraction(period),
            tuple(as_fraction(start) for start, _, _ in segments),
            tuple((as_fraction(h1), as_fraction(h2)) for _, h1, h2 in segments),
        )

    @property
    def segment_ends(self) -> Tuple[Fraction, ...]:
        return self.breakpoints[1:] + (self.period,)

    def segment_lengths(self) -> List[Fraction]:
        return [end - start for start, end in zip(self.breakpoints, self.segment_ends)]

    @property
    def max_speed(self) -> Fraction:
        return max(max(pair) for pair in self.speeds)

    def _segment_at(self, t: Fraction) -> int:
        return bisect_right(self.breakpoints, t % self.period) - 1

    def speeds_at(self, t) -> Tuple[Fraction, Fraction]:
        return self.speeds[self._segment_at(as_fraction(t))]

    def speed(self, line: int, t) -> Fraction:
        return self.speeds_at(t)[_check_line(line)]

    def distance_per_period(self, line: int) -> Fraction:
        index = _check_line(line)
        return sum(
            (length * pair[index] for length, pair in zip(self.segment_lengths(), self.speeds)),
            ZERO,
        )

    def cumulative(self, line: int, t) -> Fraction:
        """Distance travelled on ``line`` during [0, t]."""
        index = _check_line(line)
        t = as_fraction(t)
        periods = t // self.period
        remainder = t - periods * self.period
        total = periods * self.distance_per_period(line)
        for start, end, pair in zip(self.breakpoints, self.segment_ends, self.speeds):
            if remainder <= start:
                break
            total += (min(end, remainder) - start) * pair[index]
        return total

    def inverse_cumulative(self, line: int, distance) -> Fraction:
        """The time at which ``line`` has travelled ``distance``."""
        index = _check_line(line)
        distance = as_fraction(distance)
        if distance < 0:
            raise ValueError("distance must be >= 0, got %s" % distance)
        per_period = self.distance_per_period(line)
        periods = distance // per_period
        remainder = distance - periods * per_period
        offset = periods * self.period
        for start, end, pair in zip(self.breakpoints, self.segment_ends, self.speeds):
            covered = (end - start) * pair[index]
            if remainder <= covered:
                return offset + start + remainder / pair[index]
            remainder -= covered
        return offset + self.period

    def pieces(self, t0, t1) -> Iterator[Tuple[Fraction, Fraction, Tuple[Fraction, Fraction]]]:
        """Split [t0, t1] at the schedule's breakpoints."""
        t0, t1 = as_fraction(t0), as_fraction(t1)
        current = t0
        while current < t1:
            index = self._segment_at(current)
            period_start = (current // self.period) * self.period
            end = min(t1, period_start + self.segment_ends[index])
            yield current, end, self.speeds[index]
            current = end


def counterexample_schedule() -> SpeedSchedule:
    """(h1, h2) = (2, 1) on [0, 1/2) and (1, 2) on [1/2, 1), period 1."""
    return SpeedSchedule.from_segments(1, [(0, 2, 1), (Fraction(1, 2), 1, 2)])


def constant_schedule(h1=1, h2=1) -> SpeedSchedule:
    return SpeedSchedule.from_segments(1, [(0, h1, h2)])


@dataclass(frozen=True)
class PiecewiseConstantProfile:
    """Values on the cells [breakpoints[i], breakpoints[i + 1]) of [0, 1]."""

    breakpoints: Tuple[Fraction, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values) + 1 or not self.values:
            raise ValueError("a profile needs one value per cell")
        if self.breakpoints[0] != 0 or self.breakpoints[-1] != 1:
            raise ValueError("profile breakpoints must span [0, 1]")
        for left, right in zip(self.breakpoints, self.breakpoints[1:]):
            if not left < right:
                raise ValueError("profile breakpoints must be strictly increasing")
        if not all(math.isfinite(value) for value in self.values):
            raise ValueError("profile values must be finite")

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstantProfile":
        return cls((ZERO, ONE), (float(value),))

    @classmethod
    def from_cells(cls, breakpoints: Sequence, values: Sequence[float]) -> "PiecewiseConstantProfile":
        pieces = [
            (as_fraction(left), as_fraction(right), float(value))
            for left, right, value in zip(breakpoints, breakpoints[1:], values)
        ]
        return _profile_from_pieces(pieces)

    def cells(self) -> Iterator[Tuple[Fraction, Fraction, float]]:
        return zip(self.breakpoints, self.breakpoints[1:], self.values)

    def value_at(self, zeta) -> float:
        zeta = as_fraction(zeta)
        if zeta < 0 or zeta > 1:
            raise ValueError("zeta must lie in [0, 1], got %s" % zeta)
        index = min(bisect_right(self.breakpoints, zeta) - 1, len(self.values) - 1)
        return self.values[index]

    def l2_norm_squared(self) -> float:
        return math.fsum(float(right - left) * value * value for left, right, value in self.cells())

    def sup_norm(self) -> float:
        return max(abs(value) for value in self.values)

    def scaled(self, factor: float) -> "PiecewiseConstantProfile":
        return _profile_from_pieces([(l, r, factor * v) for l, r, v in self.cells()])

    def added(self, other: "PiecewiseConstantProfile") -> "PiecewiseConstantProfile":
        grid = sorted(set(self.breakpoints) | set(other.breakpoints))
        return _profile_from_pieces(
            [
                (left, right, self.value_at(left) + other.value_at(left))
                for left, right in zip(grid, grid[1:])
            ]
        )

    def overlap(self, low: Fraction, high: Fraction) -> Iterator[Tuple[Fraction, Fraction, float]]:
        for left, right, value in self.cells():
            start, end = max(left, low), min(right, high)
            if start < end:
                yield start, end, value


def _profile_from_pieces(pieces) -> PiecewiseConstantProfile:
    pieces = sorted((p for p in pieces if p[0] < p[1]), key=lambda p: p[0])
    breakpoints = [ZERO]
    values: List[float] = []
    for left, right, value in pieces:
        if left != breakpoints[-1]:
            raise ValueError("profile pieces leave a gap at %s" % breakpoints[-1])
        if values and values[-1] == value:
            breakpoints[-1] = right
        else:
            values.append(value)
            breakpoints.append(right)
    return PiecewiseConstantProfile(tuple(breakpoints), tuple(values))


@dataclass(frozen=True)
class NetworkState:
    t: Fraction
    profiles: Tuple[PiecewiseConstantProfile, PiecewiseConstantProfile]

    def value(self, line: int, zeta) -> float:
        return self.profiles[_check_line(line)].value_at(zeta)

    def l2_norm(self) -> float:
        return math.sqrt(sum(profile.l2_norm_squared() for profile in self.profiles))

    def sup_norm(self) -> float:
        return max(profile.sup_norm() for profile in self.profiles)


@dataclass(frozen=True)
class TransportNetwork:
    schedule: SpeedSchedule
    alpha: float
    initial: Tuple[PiecewiseConstantProfile, PiecewiseConstantProfile]

    def with_alpha(self, alpha: float) -> "TransportNetwork":
        return replace(self, alpha=float(alpha))

    def with_initial(self, first, second) -> "TransportNetwork":
        return replace(self, initial=(first, second))

    def with_schedule(self, schedule: SpeedSchedule) -> "TransportNetwork":
        return replace(self, schedule=schedule)

    def initial_state(self) -> NetworkState:
        return NetworkState(ZERO, self.initial)

    def gain(self, line: int, speeds: Tuple[Fraction, Fraction]) -> float:
        """Factor applied to what enters ``line`` from the other line."""
        h1, h2 = speeds
        if _check_line(line) == 0:
            return self.alpha * float(h2 / h1)
        return float(h1 / h2)


def counterexample_network(alpha: float) -> TransportNetwork:
    """Counterexample speeds with x0 = (0, 1)."""
    return TransportNetwork(
        counterexample_schedule(),
        float(alpha),
        (PiecewiseConstantProfile.constant(0.0), PiecewiseConstantProfile.constant(1.0)),
    )


def _substep(net: TransportNetwork, profiles, duration: Fraction, speeds) -> Tuple:
    shifts = (speeds[0] * duration, speeds[1] * duration)
    updated = []
    for index in (0, 1):
        other = 1 - index
        shift = shifts[index]
        pieces = [
            (left - shift, right - shift, value)
            for left, right, value in profiles[index].overlap(shift, ONE)
        ]
        stretch = speeds[index] / speeds[other]
        gain = net.gain(index + 1, speeds)
        inflow_start = ONE - shift
        pieces.extend(
            (inflow_start + stretch * left, inflow_start + stretch * right, gain * value)
            for left, right, value in profiles[other].overlap(ZERO, shifts[other])
        )
        updated.append(_profile_from_pieces(pieces))
    return tuple(updated)


def propagate(net: TransportNetwork, state: NetworkState, t) -> NetworkState:
    """Advance ``state`` exactly to time ``t``."""
    t = as_fraction(t)
    if t < state.t:
        raise ValueError("cannot propagate backwards from %s to %s" % (state.t, t))
    profiles = state.profiles
    for start, end, speeds in net.schedule.pieces(state.t, t):
        # no content may cross a whole line within one substep
        longest = ONE / max(speeds)
        current = start
        while current < end:
            duration = min(longest, end - current)
            profiles = _substep(net, profiles, duration, speeds)
            current += duration
    return NetworkState(t, profiles)


def state_at(net: TransportNetwork, t) -> NetworkState:
    return propagate(net, net.initial_state(), t)


class CharacteristicTracer:
    """Backward characteristic tracing with a memo of boundary outflow values.

    One tracer is one evaluation session; it is not shared between threads.
    """

    def __init__(self, net: TransportNetwork):
        self.net = net
        self._outflow: Dict[Tuple[int, Fraction], float] = {}

    def value(self, line: int, t, zeta) -> float:
        _check_line(line)
        t, zeta = as_fraction(t), as_fraction(zeta)
        if t < 0:
            raise ValueError("t must be >= 0, got %s" % t)
        if zeta < 0 or zeta > 1:
            raise ValueError("zeta must lie in [0, 1], got %s" % zeta)

        schedule = self.net.schedule
        chain = []
        while True:
            key = (line, t) if zeta == 0 else None
            if key is not None and key in self._outflow:
                value = self._outflow[key]
                break
            travelled = schedule.cumulative(line, t)
            remaining = ONE - zeta
            if travelled <= remaining:
                value = self.net.initial[line - 1].value_at(zeta + travelled)
                if key is not None:
                    self._outflow[key] = value
                break
            crossing = schedule.inverse_cumulative(line, travelled - remaining)
            chain.append((key, self.net.gain(line, schedule.speeds_at(crossing))))
            line, t, zeta = 3 - line, crossing, ZERO

        for key, gain in reversed(chain):
            value = gain * value
            if key is not None:
                self._outflow[key] = value
        return value


def trace_value(net: TransportNetwork, line: int, t, zeta, alpha: float = None) -> float:
    if alpha is not None:
        net = net.with_alpha(alpha)
    return CharacteristicTracer(net).value(line, t, zeta)


def riemann_l2_norm(net: TransportNetwork, t, samples: int = RIEMANN_SAMPLES) -> float:
    """Midpoint rule on ``samples`` cells per line, values from the tracer."""
    tracer = CharacteristicTracer(net)
    t = as_fraction(t)
    total = 0.0
    for line in (1, 2):
        values = np.array(
            [tracer.value(line, t, Fraction(2 * i + 1, 2 * samples)) for i in range(samples)]
        )
        total += float(np.sum(values ** 2)) / samples
    return math.sqrt(total)


class QuadratureMismatch(ArithmeticError):
    """The midpoint estimate of a norm disagrees with the exact solver."""


def midpoint_error_bound(state: NetworkState, samples: int = RIEMANN_SAMPLES) -> float:
    """Bound on |midpoint - exact| for the squared norm of ``state``.

    Only a cell holding a breakpoint can err, and by at most its width times the
    largest squared value of the line.
    """
    return math.fsum(
        (len(profile.breakpoints) - 2) * max(value * value for value in profile.values) / samples
        for profile in state.profiles
    )


def l2_norm(net: TransportNetwork, t, alpha: float = None, cross_check: bool = True) -> float:
    """Exact norm at ``t``, checked against the midpoint rule on the tracer unless ``cross_check`` is off."""
    if alpha is not None:
        net = net.with_alpha(alpha)
    state = state_at(net, t)
    exact = state.l2_norm()
    if cross_check:
        estimate = riemann_l2_norm(net, t)
        allowed = midpoint_error_bound(state) + RIEMANN_AGREEMENT * exact * exact
        if abs(estimate * estimate - exact * exact) > allowed:
            raise QuadratureMismatch(
                "midpoint estimate %.12g disagrees with exact norm %.12g at t=%s "
                "(allowed squared difference %.3e)" % (estimate, exact, t, allowed)
            )
    return exact


def classify_growth(norms: Sequence[float], threshold: float = GROWTH_SLOPE_THRESHOLD) -> Tuple[float, str]:
    """Slope of log norm per period over the last half of the sequence, and its verdict."""
    norms = np.asarray(norms, dtype=float)
    if norms.size < 2:
        raise ValueError("need at least two norms to classify growth")
    first = norms.size // 2
    if first == norms.size - 1:
        first -= 1
    tail = norms[first:]
    if np.any(tail <= 0):
        return -math.inf, DECAYING
    periods = np.arange(first, norms.size, dtype=float)
    slope = float(np.polyfit(periods, np.log(tail), 1)[0])
    if slope > threshold:
        return slope, GROWING
    if slope < -threshold:
        return slope, DECAYING
    return slope, BOUNDED


@dataclass
class GrowthSequence:
    alpha: float
    norms: List[float]
    ratios: List[float]
    sup_norms: List[float]
    slope: float
    verdict: str
    measured_factor: float
    claimed_factor: float

    def rows(self):
        for k, norm in enumerate(self.norms):
            yield k, norm, self.ratios[k - 1] if k > 0 else 1.0, self.sup_norms[k]


def growth_sequence(alpha: float, n: int, net: TransportNetwork = None) -> GrowthSequence:
    """Norms of x(k) for k = 0..n, period by period."""
    if not 1 <= n <= MAX_PERIODS:
        raise ValueError("n must lie in [1, %d], got %d" % (MAX_PERIODS, n))
    net = counterexample_network(alpha) if net is None else net.with_alpha(alpha)
    period = net.schedule.period
    state = net.initial_state()
    norms = [state.l2_norm()]
    sup_norms = [state.sup_norm()]
    for k in range(1, n + 1):
        state = propagate(net, state, k * period)
        norms.append(state.l2_norm())
        sup_norms.append(state.sup_norm())
        logger.debug("period %d: norm %.12g", k, norms[-1])
    ratios = [
        norms[k] / norms[k - 1] if norms[k - 1] > 0 else 0.0 for k in range(1, n + 1)
    ]
    slope, verdict = classify_growth(norms)
    return GrowthSequence(
        alpha=float(alpha),
        norms=norms,
        ratios=ratios,
        sup_norms=sup_norms,
        slope=slope,
        verdict=verdict,
        measured_factor=ratios[-1],
        claimed_factor=2.0 * abs(alpha),
    )


@dataclass(frozen=True)
class GrowthEnvelope:
    """``|x(t)| <= M_tilde exp(omega_tilde (t - s)) |x(s)|`` from per-substep bounds."""

    step_bound: float
    step: Fraction
    M_tilde: float
    omega_tilde: float

    def bound(self, t, s=0) -> float:
        return self.M_tilde * math.exp(self.omega_tilde * float(as_fraction(t) - as_fraction(s)))


def exponential_envelope(net: TransportNetwork) -> GrowthEnvelope:
    schedule = net.schedule
    step = min(min(schedule.segment_lengths()), ONE / schedule.max_speed)
    worst = 1.0
    for h1, h2 in schedule.speeds:
        worst = max(worst, float(h1 / h2), net.alpha ** 2 * float(h2 / h1))
    step_bound = math.sqrt(worst)
    return GrowthEnvelope(
        step_bound=step_bound,
        step=step,
        M_tilde=step_bound ** 2,
        omega_tilde=math.log(step_bound) / float(step),
    )


def estimate_critical_alpha(
    net: TransportNetwork = None,
    periods: int = 40,
    low: float = 0.0,
    high: float = 1.0,
    tolerance: float = 1e-4,
) -> float:
    """Bisection for the smallest alpha whose norms grow."""
    net = counterexample_network(0.0) if net is None else net
    if growth_sequence(high, periods, net).verdict != GROWING:
        raise ValueError("norms do not grow at alpha=%s" % high)
    if growth_sequence(low, periods, net).verdict == GROWING:
        raise ValueError("norms already grow at alpha=%s" % low)
    while high - low > tolerance:
        middle = 0.5 * (low + high)
        if growth_sequence(middle, periods, net).verdict == GROWING:
            high = middle
        else:
            low = middle
    return 0.5 * (low + high)
