"""Method of lines for dx/dt = (P1 d/dzeta + P0)(H x) + K x.

Second order differences in space, the classical four stage Runge-Kutta
scheme in time. After every stage the boundary traces u = ((Hx)(b), (Hx)(a))
are projected orthogonally onto ker W_tilde_B and written back as x = H^-1 u.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence, Union
import logging
import math

import numpy as np

from .. import algebra
from .._settings import (
    BLOW_UP_FACTOR,
    COMPATIBILITY_TOLERANCE,
    DEFAULT_CELLS,
    DEFAULT_CFL,
    MAX_CFL,
)
from ..exprlang import evaluate, parse_or_constant
from ..model.fields import CoefficientField
from ..model.system import PHSystem
from ..model.validation import trace_projector
from .grid import ONE_SIDED, Grid, difference, grid_for_state
from .trajectory import Trajectory

logger = logging.getLogger(__name__)


class SimulationBlowUp(RuntimeError):
    def __init__(self, reason: str, t: float, step: int):
        self.t = t
        self.step = step
        super().__init__("%s at t=%.6g (step %d)" % (reason, t, step))


class Compatibility(NamedTuple):
    ok: bool
    residual: float
    norm: float
    curvature: float
    smooth: bool


class _FieldCache:
    """Samples of one field on the grid nodes; holds the last time only."""

    def __init__(self, field_: CoefficientField, nodes: np.ndarray):
        self.field = field_
        self.nodes = nodes
        self.constant = not field_.depends_on_time()
        self._t = None
        self._values = None

    def __call__(self, t: float) -> np.ndarray:
        if self._values is None or (not self.constant and t != self._t):
            self._t = t
            self._values = self.field.sample(t, self.nodes)
        return self._values


InitialState = Union[np.ndarray, Sequence, Callable]


def sample_initial_state(system: PHSystem, grid: Grid, x0: InitialState) -> np.ndarray:
    """x0 as one expression (or number) per component, a callable of zeta, or an array."""
    nodes = grid.nodes
    if callable(x0):
        state = np.asarray(x0(nodes))
        if state.shape == (system.n, len(nodes)):
            state = state.T
    elif isinstance(x0, np.ndarray) and x0.ndim == 2:
        state = x0
    else:
        if len(x0) != system.n:
            raise ValueError("x0 needs %d components, got %d" % (system.n, len(x0)))
        state = np.column_stack(
            [np.broadcast_to(evaluate(parse_or_constant(value), 0.0, nodes), nodes.shape) for value in x0]
        )
    if state.shape != (len(nodes), system.n):
        raise ValueError(
            "initial state must have shape (%d, %d), got %s"
            % (len(nodes), system.n, state.shape)
        )
    if not np.all(np.isfinite(state)):
        raise ValueError("initial state has non-finite entries")
    return np.array(state, dtype=complex if np.iscomplexobj(state) else float)


def _boundary_traces(h_values: np.ndarray, state: np.ndarray):
    y_b = h_values[-1] @ state[-1]
    y_a = h_values[0] @ state[0]
    return y_a, y_b


def energy(system: PHSystem, state: np.ndarray, t: float, grid: Grid = None) -> float:
    """1/2 sum_i w_i x_i* H(t, zeta_i) x_i with trapezoid weights."""
    state = np.asarray(state)
    grid = grid_for_state(state, system.interval) if grid is None else grid
    h_values = system.H.sample(t, grid.nodes)
    density = np.einsum("ij,ijk,ik->i", state.conj(), h_values, state)
    return 0.5 * float(np.sum(grid.weights * density.real))


def check_compatibility(
    system: PHSystem, x0: np.ndarray, tol: float = COMPATIBILITY_TOLERANCE, grid: Grid = None
) -> Compatibility:
    """Boundary residual |W_tilde_B u| of the sampled initial state against tol |x0|,
    and a second difference smoothness indicator of H x0."""
    x0 = np.asarray(x0)
    grid = grid_for_state(x0, system.interval) if grid is None else grid
    h_values = system.H.sample(0.0, grid.nodes)
    y_a, y_b = _boundary_traces(h_values, x0)
    residual = float(np.linalg.norm(system.W_tilde_B @ np.concatenate([y_b, y_a])))
    norm = float(np.sqrt(np.sum(grid.weights * np.sum(np.abs(x0) ** 2, axis=1))))
    y = np.einsum("ijk,ik->ij", h_values, x0)
    second = np.abs(y[2:] - 2.0 * y[1:-1] + y[:-2]) / grid.h ** 2
    curvature = float(np.max(second) / max(1.0, float(np.max(np.abs(y)))))
    smooth = curvature <= 1.0 / grid.h
    ok = residual <= tol * norm
    if not ok:
        logger.info("initial state violates the boundary condition, residual %.3e", residual)
    return Compatibility(ok, residual, norm, curvature, smooth)


def time_step(system: PHSystem, grid: Grid, t_end: float, cfl: float):
    """(dt, steps) with dt <= cfl h / (|P1| M) landing exactly on t_end."""
    speed = algebra.spectral_norm(system.P1) * system.bounds.M
    limit = cfl * grid.h / speed
    if t_end == 0.0:
        return limit, 0
    steps = int(math.ceil(t_end / limit))
    return t_end / steps, steps


def simulate(
    system: PHSystem,
    x0: InitialState,
    t_end: float,
    N: int = DEFAULT_CELLS,
    cfl: float = DEFAULT_CFL,
    record_stride: int = 1,
    closure: str = ONE_SIDED,
    store_states: bool = False,
) -> Trajectory:
    if not 0.0 < cfl <= MAX_CFL:
        raise ValueError("cfl must lie in (0, %s], got %s" % (MAX_CFL, cfl))
    if not t_end >= 0.0 or not math.isfinite(t_end):
        raise ValueError("t_end must be finite and >= 0, got %s" % t_end)
    if int(record_stride) != record_stride or record_stride < 1:
        raise ValueError("record_stride must be a positive integer, got %s" % record_stride)

    grid = Grid(N, system.interval)
    state = sample_initial_state(system, grid, x0)
    compatibility = check_compatibility(system, state, grid=grid)
    if not compatibility.ok:
        logger.warning(
            "initial state is not compatible with the boundary condition "
            "(residual %.3e, |x0| %.3e), it is projected at t=0",
            compatibility.residual,
            compatibility.norm,
        )

    n = system.n
    complex_valued = (
        np.iscomplexobj(state)
        or np.any(system.P0.imag != 0)
        or np.any(system.P1.imag != 0)
        or system.H.is_complex
        or system.K.is_complex
    )
    dtype = complex if complex_valued else float
    P0 = system.P0 if complex_valued else system.P0.real
    P1 = system.P1 if complex_valued else system.P1.real
    projector = trace_projector(system.W_tilde_B)
    projector = projector if complex_valued else projector.real
    state = state.astype(dtype)

    nodes = grid.nodes
    hamiltonian = _FieldCache(system.H, nodes)
    perturbation = None if system.K.is_zero() else _FieldCache(system.K, nodes)
    h = grid.h
    weights = grid.weights

    def project(t: float, x: np.ndarray) -> np.ndarray:
        h_values = hamiltonian(t)
        y_a, y_b = _boundary_traces(h_values, x)
        u = projector @ np.concatenate([y_b, y_a])
        x = x.copy()
        x[-1] = np.linalg.solve(h_values[-1], u[:n])
        x[0] = np.linalg.solve(h_values[0], u[n:])
        return x

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        y = np.einsum("ijk,ik->ij", hamiltonian(t), x)
        dx = difference(y, h, closure) @ P1.T + y @ P0.T
        if perturbation is not None:
            dx = dx + np.einsum("ijk,ik->ij", perturbation(t), x)
        return dx

    def current_energy(t: float, x: np.ndarray) -> float:
        density = np.einsum("ij,ijk,ik->i", x.conj(), hamiltonian(t), x)
        return 0.5 * float(np.sum(weights * density.real))

    def record_traces(t: float, x: np.ndarray):
        y_a, y_b = _boundary_traces(hamiltonian(t), x)
        trace_a.append(y_a)
        trace_b.append(y_b)
        return float(np.linalg.norm(system.W_tilde_B @ np.concatenate([y_b, y_a])))

    dt, n_steps = time_step(system, grid, float(t_end), cfl)
    logger.info(
        "simulating %s: N=%d h=%.4g dt=%.4g steps=%d closure=%s",
        system.name,
        N,
        h,
        dt,
        n_steps,
        closure,
    )

    state = project(0.0, state)
    initial = current_energy(0.0, state)
    ceiling = BLOW_UP_FACTOR * max(initial, np.finfo(float).tiny)

    times, energies, record_index, states = [0.0], [initial], [0], []
    trace_a, trace_b = [], []
    max_residual = record_traces(0.0, state)
    if store_states:
        states.append(state.copy())

    for step in range(1, n_steps + 1):
        t = (step - 1) * dt
        k1 = rhs(t, state)
        stage = project(t + 0.5 * dt, state + 0.5 * dt * k1)
        k2 = rhs(t + 0.5 * dt, stage)
        stage = project(t + 0.5 * dt, state + 0.5 * dt * k2)
        k3 = rhs(t + 0.5 * dt, stage)
        stage = project(t + dt, state + dt * k3)
        k4 = rhs(t + dt, stage)
        t_next = step * dt
        state = project(t_next, state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))

        if not np.all(np.isfinite(state)):
            raise SimulationBlowUp("non-finite state", t_next, step)
        residual = record_traces(t_next, state)
        max_residual = max(max_residual, residual)
        current = current_energy(t_next, state)
        if current > ceiling:
            raise SimulationBlowUp(
                "energy %.3e exceeds %.0e times the initial energy %.3e"
                % (current, BLOW_UP_FACTOR, initial),
                t_next,
                step,
            )

        if step % record_stride == 0 or step == n_steps:
            times.append(t_next)
            energies.append(current)
            record_index.append(step)
            if store_states:
                states.append(state.copy())

    return Trajectory(
        times=np.array(times),
        energies=np.array(energies),
        record_index=np.array(record_index, dtype=int),
        trace_times=np.arange(n_steps + 1) * dt,
        trace_a=np.array(trace_a),
        trace_b=np.array(trace_b),
        states=np.array(states) if store_states else None,
        meta={
            "n_cells": N,
            "h": h,
            "dt": dt,
            "cfl": cfl,
            "n_steps": n_steps,
            "closure": closure,
            "record_stride": int(record_stride),
            "fingerprint": system.fingerprint(),
            "max_boundary_residual": max_residual,
            "initial_compatible": bool(compatibility.ok),
            "initial_residual": compatibility.residual,
        },
    )


def final_state(system: PHSystem, x0: InitialState, t_end: float, **options) -> np.ndarray:
    """State at t_end, for convergence and time reversal checks."""
    trajectory = simulate(system, x0, t_end, store_states=True, record_stride=10 ** 9, **options)
    return trajectory.states[-1]
