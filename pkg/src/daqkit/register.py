"""Qubit registers: 2D coordinates plus a connectivity graph."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from daqkit.errors import EmptyRegister, InvalidSpacing

Pair = tuple[int, int]


def _check(n: int, spacing: float) -> None:
    if n < 1:
        raise EmptyRegister("a register needs at least one qubit")
    if not spacing > 0:
        raise InvalidSpacing(f"spacing must be positive, got {spacing}")


@dataclass(frozen=True)
class Register:
    coords: tuple[tuple[float, float], ...]
    edges: tuple[Pair, ...]

    def __post_init__(self) -> None:
        if not self.coords:
            raise EmptyRegister("a register needs at least one qubit")
        n = len(self.coords)
        clean = []
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) references a missing node")
            clean.append((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(set(clean))))

    # constructors ---------------------------------------------------------

    @classmethod
    def line(cls, n_qubits: int, spacing: float = 1.0) -> Register:
        _check(n_qubits, spacing)
        coords = tuple((i * spacing, 0.0) for i in range(n_qubits))
        return cls(coords, tuple((i, i + 1) for i in range(n_qubits - 1)))

    @classmethod
    def circle(cls, n_qubits: int, spacing: float = 1.0) -> Register:
        """Points on a circle whose neighbouring points sit ``spacing`` apart."""
        _check(n_qubits, spacing)
        if n_qubits == 1:
            return cls(((0.0, 0.0),), ())
        radius = spacing / (2.0 * math.sin(math.pi / n_qubits))
        coords = tuple(
            (
                radius * math.cos(2.0 * math.pi * k / n_qubits),
                radius * math.sin(2.0 * math.pi * k / n_qubits),
            )
            for k in range(n_qubits)
        )
        edges = {tuple(sorted((k, (k + 1) % n_qubits))) for k in range(n_qubits)}
        return cls(coords, tuple(edges))

    @classmethod
    def triangular_lattice(
        cls, n_cells_row: int, n_cells_col: int, spacing: float = 1.0
    ) -> Register:
        """Rhombic patch of (n_cells_row + 1) x (n_cells_col + 1) lattice sites.

        Sites are enumerated row-major; site (r, c) sits at
        ``spacing * (c + r/2, r * sqrt(3)/2)``. Edges join sites one
        ``spacing`` apart.
        """
        rows, cols = n_cells_row + 1, n_cells_col + 1
        _check(rows * cols if n_cells_row >= 0 and n_cells_col >= 0 else 0, spacing)
        h = math.sqrt(3.0) / 2.0
        coords = tuple(
            (spacing * (c + 0.5 * r), spacing * (h * r)) for r in range(rows) for c in range(cols)
        )
        pts = np.asarray(coords)
        edges = [
            (i, j)
            for i, j in itertools.combinations(range(len(coords)), 2)
            if abs(np.linalg.norm(pts[i] - pts[j]) - spacing) <= 1e-9 * spacing
        ]
        return cls(coords, tuple(edges))

    @classmethod
    def from_coordinates(cls, coords: Iterable[Sequence[float]]) -> Register:
        """Nodes exactly as given; edges join the pairs at minimal distance."""
        pts = tuple((float(x), float(y)) for x, y in coords)
        if not pts:
            raise EmptyRegister("a register needs at least one qubit")
        reg = cls(pts, ())
        if len(pts) < 2:
            return reg
        dist = reg.distances
        dmin = min(dist.values())
        tol = 1e-9 * max(1.0, dmin)
        edges = tuple(p for p, d in dist.items() if d - dmin <= tol)
        return cls(pts, edges)

    # queries ----------------------------------------------------------------

    @property
    def n_qubits(self) -> int:
        return len(self.coords)

    @property
    def nodes(self) -> list[int]:
        return list(range(self.n_qubits))

    @property
    def all_node_pairs(self) -> list[Pair]:
        return list(itertools.combinations(range(self.n_qubits), 2))

    @cached_property
    def distances(self) -> dict[Pair, float]:
        pts = np.asarray(self.coords, dtype=float)
        return {
            (i, j): float(math.hypot(*(pts[i] - pts[j]))) for i, j in self.all_node_pairs
        }

    def distance(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return self.distances[(min(i, j), max(i, j))]

    def scaled(self, factor: float) -> Register:
        if not factor > 0:
            raise InvalidSpacing("scale factor must be positive")
        coords = tuple((x * factor, y * factor) for x, y in self.coords)
        return Register(coords, self.edges)

    # JSON -----------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "nodes": [list(c) for c in self.coords],
            "edges": [list(e) for e in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> Register:
        coords = tuple((float(x), float(y)) for x, y in data["nodes"])
        if "edges" not in data:
            return cls.from_coordinates(coords)
        return cls(coords, tuple((int(i), int(j)) for i, j in data["edges"]))

    @classmethod
    def from_json(cls, text: str) -> Register:
        return cls.from_dict(json.loads(text))


def build_register(kind: str, *args, **kwargs) -> Register:
    """Dispatch by name: line, circle, triangular_lattice or from_coordinates."""
    builders = {
        "line": Register.line,
        "circle": Register.circle,
        "triangular_lattice": Register.triangular_lattice,
        "from_coordinates": Register.from_coordinates,
    }
    try:
        return builders[kind](*args, **kwargs)
    except KeyError:
        raise ValueError(f"unknown register kind {kind!r}") from None


def topology_queries(reg: Register) -> dict:
    return {
        "edges": list(reg.edges),
        "all_node_pairs": reg.all_node_pairs,
        "distances": dict(reg.distances),
    }
