from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np

from .._file_utils import write_csv


@dataclass
class Trajectory:
    """Recorded solution of one simulation.

    ``times``/``energies`` are stride decimated; ``trace_*`` hold (Hx)(t, a) and
    (Hx)(t, b) after every time step, at ``trace_times``.
    """

    times: np.ndarray
    energies: np.ndarray
    record_index: np.ndarray
    trace_times: np.ndarray
    trace_a: np.ndarray
    trace_b: np.ndarray
    states: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def norms_squared(self) -> np.ndarray:
        return 2.0 * self.energies

    def trace_norms_squared(self, endpoint: str = "b") -> np.ndarray:
        if endpoint not in ("a", "b"):
            raise ValueError("endpoint must be 'a' or 'b', got %s" % endpoint)
        trace = self.trace_b if endpoint == "b" else self.trace_a
        return np.sum(np.abs(trace) ** 2, axis=1)

    def energy_at(self, t) -> np.ndarray:
        return np.interp(t, self.times, self.energies)

    @property
    def initial_energy(self) -> float:
        return float(self.energies[0])

    @property
    def final_energy(self) -> float:
        return float(self.energies[-1])

    def relative_drift(self) -> float:
        if self.initial_energy == 0.0:
            return 0.0
        return abs(self.final_energy - self.initial_energy) / self.initial_energy

    def header(self, include_states: bool = False) -> List[str]:
        columns = ["t", "E", "trace_a_sq", "trace_b_sq"]
        if include_states and self.states is not None:
            _, nodes, n = self.states.shape
            parts = ["re", "im"] if np.iscomplexobj(self.states) else [None]
            for component in range(n):
                for part in parts:
                    for node in range(nodes):
                        if part is None:
                            columns.append("x%d_%d" % (component, node))
                        else:
                            columns.append("x%d_%d_%s" % (component, node, part))
        return columns

    def rows(self, include_states: bool = False) -> Iterator[list]:
        trace_a_sq = self.trace_norms_squared("a")
        trace_b_sq = self.trace_norms_squared("b")
        with_states = include_states and self.states is not None
        for k, t in enumerate(self.times):
            step = self.record_index[k]
            row = [float(t), float(self.energies[k]), float(trace_a_sq[step]), float(trace_b_sq[step])]
            if with_states:
                state = self.states[k]
                for component in range(state.shape[1]):
                    values = state[:, component]
                    if np.iscomplexobj(values):
                        row.extend(float(v) for v in values.real)
                        row.extend(float(v) for v in values.imag)
                    else:
                        row.extend(float(v) for v in values)
            yield row

    def summary(self) -> dict:
        return {
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "relative_drift": self.relative_drift(),
            "t_end": float(self.times[-1]),
            "records": len(self.times),
            "steps": int(self.meta.get("n_steps", len(self.trace_times) - 1)),
            "meta": dict(self.meta),
        }


def export_csv(trajectory: Trajectory, file_path: str, include_states: bool = False) -> str:
    return write_csv(
        file_path,
        trajectory.header(include_states),
        trajectory.rows(include_states),
    )
