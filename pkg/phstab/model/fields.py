from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exprlang import (
    Constant,
    ExpressionEvaluationError,
    Node,
    Unary,
    depends_on,
    evaluate,
    parse_or_constant,
)

CONSTANT = "constant"
DIAGONAL = "diagonal"
GENERAL = "general"


class FieldEvaluationError(ArithmeticError):
    def __init__(self, reason: str, row: int, col: int, t: float, zeta: float):
        self.reason = reason
        self.entry = (row, col)
        self.t = t
        self.zeta = zeta
        super().__init__(
            "%s (entry (%d, %d) at t=%.6g, zeta=%.6g)" % (reason, row, col, t, zeta)
        )


def _is_zero(node: Node) -> bool:
    return isinstance(node, Constant) and node.value == 0.0


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Matrix valued function of (t, zeta) with one expression per entry.

    Complex fields carry a second grid of expressions for the imaginary parts.
    """

    entries: Tuple[Tuple[Node, ...], ...]
    imag_entries: Optional[Tuple[Tuple[Node, ...], ...]] = None
    declared_bounds: Optional[Tuple[float, float]] = None
    declared_time_derivative_bound: Optional[float] = None
    declared_zeta_lipschitz: Optional[float] = None

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise ValueError("coefficient field must be a non-empty square grid")
        if self.imag_entries is not None and (
            len(self.imag_entries) != n or any(len(row) != n for row in self.imag_entries)
        ):
            raise ValueError("imaginary part must have the same shape as the real part")
        if self.declared_bounds is not None:
            low, high = self.declared_bounds
            if not 0 < low <= high:
                raise ValueError(
                    "declared bounds must satisfy 0 < m <= M, got (%s, %s)" % (low, high)
                )

    @classmethod
    def from_sources(
        cls,
        rows: Sequence[Sequence],
        imag_rows: Sequence[Sequence] = None,
        **declared,
    ) -> "CoefficientField":
        entries = tuple(tuple(parse_or_constant(value) for value in row) for row in rows)
        imag_entries = None
        if imag_rows is not None:
            imag_entries = tuple(
                tuple(parse_or_constant(value) for value in row) for row in imag_rows
            )
        return cls(entries, imag_entries, **declared)

    @classmethod
    def constant(cls, matrix, **declared) -> "CoefficientField":
        matrix = np.asarray(matrix)
        imag_rows = None
        if np.iscomplexobj(matrix) and np.any(matrix.imag != 0):
            imag_rows = matrix.imag.tolist()
        return cls.from_sources(np.real(matrix).tolist(), imag_rows, **declared)

    @classmethod
    def diagonal(cls, sources: Sequence, **declared) -> "CoefficientField":
        n = len(sources)
        rows = [[sources[i] if i == j else 0.0 for j in range(n)] for i in range(n)]
        return cls.from_sources(rows, **declared)

    @classmethod
    def zero(cls, n: int) -> "CoefficientField":
        return cls.from_sources([[0.0] * n for _ in range(n)])

    @property
    def n(self) -> int:
        return len(self.entries)

    def _all_nodes(self) -> List[Node]:
        nodes = [node for row in self.entries for node in row]
        if self.imag_entries is not None:
            nodes.extend(node for row in self.imag_entries for node in row)
        return nodes

    @property
    def kind(self) -> str:
        if all(isinstance(node, Constant) for node in self._all_nodes()):
            return CONSTANT
        grids = [self.entries] + ([self.imag_entries] if self.imag_entries else [])
        off_diagonal = [
            grid[i][j]
            for grid in grids
            for i in range(self.n)
            for j in range(self.n)
            if i != j
        ]
        if all(_is_zero(node) for node in off_diagonal):
            return DIAGONAL
        return GENERAL

    @property
    def is_complex(self) -> bool:
        return self.imag_entries is not None and not all(
            _is_zero(node) for row in self.imag_entries for node in row
        )

    def is_zero(self) -> bool:
        return all(_is_zero(node) for node in self._all_nodes())

    def is_constant(self) -> bool:
        return self.kind == CONSTANT

    def depends_on_time(self) -> bool:
        return any(depends_on(node, "t") for node in self._all_nodes())

    def depends_on_zeta(self) -> bool:
        return any(depends_on(node, "zeta") for node in self._all_nodes())

    def sample(self, t: float, zeta) -> np.ndarray:
        """Matrices at time ``t`` and every position in ``zeta``, shape (len, n, n)."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        dtype = complex if self.is_complex else float
        values = np.zeros((zeta.size, self.n, self.n), dtype=dtype)
        grids = [(self.entries, 1.0)]
        if self.is_complex:
            grids.append((self.imag_entries, 1j))
        for grid, unit in grids:
            for i, row in enumerate(grid):
                for j, node in enumerate(row):
                    if _is_zero(node):
                        continue
                    values[:, i, j] += unit * self._evaluate_entry(node, i, j, t, zeta)
        return values

    def at(self, t: float, zeta: float) -> np.ndarray:
        return self.sample(t, np.array([zeta]))[0]

    def _evaluate_entry(self, node, row, col, t, zeta) -> np.ndarray:
        try:
            return evaluate(node, t, zeta)
        except ExpressionEvaluationError as err:
            for position in zeta:
                try:
                    evaluate(node, t, position)
                except ExpressionEvaluationError:
                    raise FieldEvaluationError(str(err), row, col, t, position) from err
            raise FieldEvaluationError(str(err), row, col, t, float(zeta[0])) from err

    def negated(self) -> "CoefficientField":
        def negate(grid):
            return tuple(
                tuple(node if _is_zero(node) else Unary("-", node) for node in row)
                for row in grid
            )

        return CoefficientField(
            negate(self.entries),
            negate(self.imag_entries) if self.imag_entries is not None else None,
        )

    def to_sources(self):
        description = {"real": [[node.to_source() for node in row] for row in self.entries]}
        if self.imag_entries is not None:
            description["imag"] = [
                [node.to_source() for node in row] for row in self.imag_entries
            ]
        return description
