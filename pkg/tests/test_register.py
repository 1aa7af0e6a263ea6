import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from daqkit.errors import EmptyRegister, InvalidSpacing
from daqkit.register import Register, build_register, topology_queries


def test_line():
    r = Register.line(3)
    assert r.coords == ((0.0, 0.0), (1.0, 0.0), (2.0, 0.0))
    assert set(r.edges) == {(0, 1), (1, 2)}
    assert r.distance(0, 2) == 2.0
    q = topology_queries(r)
    assert len(q["all_node_pairs"]) == 3 and len(q["edges"]) == 2


def test_from_coordinates():
    r = Register.from_coordinates([(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)])
    assert r.n_qubits == 3
    assert set(r.edges) == {(0, 1), (1, 2)}


def test_circle_geometry():
    r = Register.circle(4, spacing=1.0)
    for i in range(4):
        assert r.distance(i, (i + 1) % 4) == pytest.approx(1.0, abs=1e-12)
    assert r.distance(0, 2) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert len(r.edges) == 4


def test_triangular_lattice_convention():
    r = Register.triangular_lattice(2, 2, spacing=2.0)
    assert r.n_qubits == 9
    # row-major sites spacing * (c + r/2, r*sqrt(3)/2)
    expected = [(2.0 * (c + rr / 2), 2.0 * rr * math.sqrt(3) / 2) for rr in range(3) for c in range(3)]
    assert np.allclose(r.coords, expected)
    for i, j in r.edges:
        assert abs(r.distance(i, j) - 2.0) <= 1e-9
    # 3 rows x 2 horizontal + 2 x (3 + 2) diagonal bonds
    assert len(r.edges) == 16


def test_errors():
    with pytest.raises(InvalidSpacing):
        Register.line(3, spacing=0.0)
    with pytest.raises(EmptyRegister):
        Register.line(0)
    with pytest.raises(ValueError):
        build_register("hexagon", 3)


def test_json_round_trip():
    r = Register.from_coordinates([(0.1, 0.2), (1.0 / 3.0, 5.5)])
    back = Register.from_json(r.to_json())
    assert back.coords == r.coords and back.edges == r.edges


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from(["line", "circle", "tri"]),
    st.integers(2, 6),
    st.floats(0.1, 10.0),
    st.floats(0.1, 10.0),
)
def test_topology_properties(kind, n, spacing, s):
    if kind == "line":
        r = Register.line(n, spacing)
    elif kind == "circle":
        r = Register.circle(n, spacing)
    else:
        r = Register.triangular_lattice(n // 3 + 1, n % 3 + 1, spacing)
    pairs = set(r.all_node_pairs)
    assert set(r.edges) <= pairs
    assert pairs == set(itertools.combinations(range(r.n_qubits), 2))
    scaled = r.scaled(s)
    for p in pairs:
        assert scaled.distances[p] == pytest.approx(s * r.distances[p], rel=1e-12)
    assert Register.from_coordinates(r.coords).coords == r.coords
