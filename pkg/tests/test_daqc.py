import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from daqkit.blocks import RX, RY, RZ, QuantumCircuit, X, Z, N, chain, hamevo, kron, scale
from daqkit.constructors import build_qft
from daqkit.daqc import (
    AnalogInteraction,
    AnalogRot,
    AnalogRX,
    AnalogRY,
    AnalogRZ,
    DaqcTransformRequest,
    Strategy,
    build_da_qft,
    complete_graph_zz,
    daqc_transform,
    ising_terms,
    lower_analog,
    solve_daqc,
)
from daqkit.errors import NonIsingGenerator, SingularTransform, UnsupportedStrategy
from daqkit.hamiltonian import C6_DEFAULT, RydbergParams, hamiltonian_factory
from daqkit.register import Register
from daqkit.simulator import compile_circuit, run, to_matrix

from oracles import PX, PY, nn_matrix, phase_error, rx, ry, rz, zz_matrix


def _zz(pairs, n):
    return hamiltonian_factory(n, "ZZ", [pairs.get(p, 0.0) for p in itertools.combinations(range(n), 2)], use_all_node_pairs=True)


def _analog_matrix(op, reg, params=None):
    return to_matrix(lower_analog(op, reg, params), reg.n_qubits)


def test_analog_rx_pi_isolated():
    reg = Register.line(1)
    psi = run(QuantumCircuit(reg, AnalogRX(np.pi)))[0]
    assert np.allclose(psi, [0, -1j], atol=1e-12)


def test_analog_interaction_phases():
    reg = Register.from_coordinates([(0, 0), (7.0, 0)])
    t = 0.4
    m = _analog_matrix(AnalogInteraction(t), reg)
    v = C6_DEFAULT / 7.0**6
    assert np.allclose(m, np.diag([1, 1, 1, np.exp(-1j * t * v)]), atol=1e-12)


@pytest.mark.parametrize("theta", [0.3, 1.7, -2.2])
def test_analog_rotations_decoupled_limit(theta):
    reg = Register.line(3, spacing=1.0)
    p = RydbergParams(c6=1e-300)
    rxm = _analog_matrix(AnalogRX(theta), reg, p)
    assert np.max(np.abs(rxm - np.kron(np.kron(rx(theta), rx(theta)), rx(theta)))) <= 1e-10
    rym = _analog_matrix(AnalogRY(theta), reg, p)
    assert np.max(np.abs(rym - np.kron(np.kron(ry(theta), ry(theta)), ry(theta)))) <= 1e-10
    rzm = _analog_matrix(AnalogRZ(theta), reg, p)
    assert phase_error(rzm, np.kron(np.kron(rz(theta), rz(theta)), rz(theta))) <= 1e-10


def test_analog_rot_passes_through():
    reg = Register.line(1)
    m = _analog_matrix(AnalogRot(omega=2.0, phase=0.0, delta=0.0, duration=0.5), reg)
    assert np.allclose(m, expm(-0.5j * PX), atol=1e-12)


def test_analog_rx_relabel_symmetry():
    coords = [(0.0, 0.0), (5.0, 0.0), (2.0, 6.0)]
    perm = [2, 0, 1]
    a = Register.from_coordinates(coords)
    b = Register.from_coordinates([coords[i] for i in perm])
    ma = _analog_matrix(AnalogRX(1.1), a)
    mb = _analog_matrix(AnalogRX(1.1), b)
    # basis index map for the permutation of qubits
    idx = []
    for k in range(8):
        bb = format(k, "03b")
        ab = ["0"] * 3
        for m, p in enumerate(perm):
            ab[p] = bb[m]
        idx.append(int("".join(ab), 2))
    assert np.allclose(mb, ma[np.ix_(idx, idx)], atol=1e-12)


def test_analog_invariants_and_strategy():
    with pytest.raises(ValueError):
        from daqkit.daqc import AnalogKind, AnalogOp

        AnalogOp(AnalogKind.RX)
    with pytest.raises(UnsupportedStrategy):
        lower_analog(AnalogRX(0.1), Register.line(2), strategy=Strategy.SDAQC)
    assert AnalogRX("t").parameters() and AnalogInteraction(1.0).qubit_support == ()


def test_analog_circuit_parameters_compile():
    prog = compile_circuit(QuantumCircuit(Register.line(2, 8.0), chain(AnalogRX("t0"), AnalogRZ("s0"))))
    assert prog.occurrences("t0") == [0] and prog.occurrences("s0") == [1]


def test_ising_terms_nn():
    poly = ising_terms(kron(N(0), N(1)))
    assert poly == {frozenset(): 0.25, frozenset({0}): -0.25, frozenset({1}): -0.25, frozenset({0, 1}): 0.25}
    with pytest.raises(NonIsingGenerator):
        ising_terms(kron(X(0), X(1)))


def test_one_pair_case():
    g, h, tf = 0.7, 1.3, 2.0
    sol = solve_daqc(2, scale(g, kron(Z(0), Z(1))), tf, scale(h, kron(Z(0), Z(1))))
    assert sol.times == [pytest.approx(tf * g / h)]
    assert sol.flips == [()]


def test_identity_mapping_total_time():
    b = hamiltonian_factory(3, "NN", [0.5, 1.0, 2.0], use_all_node_pairs=True)
    sol = solve_daqc(3, b, 1.7, b)
    assert sol.total_time == pytest.approx(1.7, abs=1e-12)


def test_request_form():
    req = DaqcTransformRequest(2, kron(Z(0), Z(1)), 1.0, kron(Z(0), Z(1)))
    blk = daqc_transform(req)
    assert np.allclose(to_matrix(blk, 2), expm(-1j * to_matrix(kron(Z(0), Z(1)), 2)))


def test_code_sample_instance():
    reg = Register.triangular_lattice(2, 2, spacing=2.0)
    strengths = [1.0 / reg.distances[p] for p in reg.all_node_pairs]
    build = hamiltonian_factory(reg, "NN", strengths, detuning=X, detuning_strength="d", use_all_node_pairs=True)
    target = kron(N(0), N(1)) + kron(N(1), N(2)) + kron(N(2), N(0))
    n = reg.n_qubits
    u = to_matrix(daqc_transform(n, target, 5.0, build), n)
    ref = expm(-5.0j * nn_matrix({(0, 1): 1, (1, 2): 1, (0, 2): 1}, n))
    assert phase_error(u, ref) <= 1e-8


@pytest.mark.parametrize("n,seed", [(3, 0), (3, 1), (4, 2), (4, 3)])
def test_random_zz_instances(n, seed):
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    g = {p: rng.uniform(0.05, 1) * rng.choice([-1, 1]) for p in pairs}
    h = {p: rng.uniform(0.2, 2) for p in pairs}
    tf = rng.uniform(0.5, 2)
    sol = solve_daqc(n, _zz(g, n), tf, _zz(h, n))
    u = to_matrix(sol.block, n)
    assert phase_error(u, expm(-1j * tf * zz_matrix(g, {}, n))) <= 1e-8


def test_negative_times_match_flipped_conjugation():
    h = _zz({(0, 1): 1.0, (1, 2): 0.5, (0, 2): 0.8}, 3)
    t = -0.6
    direct = to_matrix(hamevo(h, t), 3)
    # every pair is sign-flipped by two of the three single-qubit X conjugations,
    # so sum_k X_k H X_k = -H and the three diagonal evolutions commute
    sandwich = chain(chain(X(k), hamevo(h, -t), X(k)) for k in range(3))
    assert np.max(np.abs(to_matrix(sandwich, 3) - direct)) <= 1e-12
    sol = solve_daqc(3, scale(-1.0, h), -t, h)
    assert phase_error(to_matrix(sol.block, 3), direct) <= 1e-10


def test_singular_when_build_misses_a_pair():
    with pytest.raises(SingularTransform):
        solve_daqc(3, _zz({(0, 2): 1.0}, 3), 1.0, _zz({(0, 1): 1.0, (1, 2): 1.0}, 3))
    with pytest.raises(UnsupportedStrategy):
        daqc_transform(2, kron(Z(0), Z(1)), 1.0, kron(Z(0), Z(1)), strategy=Strategy.BDAQC)


def test_da_qft():
    assert build_da_qft(3, Strategy.DIGITAL) == build_qft([0, 1, 2])
    u = to_matrix(build_da_qft(3, Strategy.SDAQC, complete_graph_zz(3)), 3)
    assert phase_error(u, to_matrix(build_qft(range(3)), 3)) <= 1e-7
    one = build_da_qft(1, Strategy.SDAQC)
    assert np.allclose(to_matrix(one, 1), to_matrix(build_qft([0]), 1))
    assert not any(b.tag == "sDAQC" for b in one.walk())
