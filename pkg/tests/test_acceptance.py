"""End-to-end acceptance checks, one line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are echoed in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

sys.path.insert(0, str(Path(__file__).parent))

from daqkit.blocks import CNOT, CZ, RX, RY, RZ, H, QuantumCircuit, X, Y, Z, N, chain, hamevo, kron
from daqkit.constructors import build_qft
from daqkit.daqc import Strategy, build_da_qft, complete_graph_zz, solve_daqc
from daqkit.diff import DiffMode, GradientRequest, compute_gradient, spectral_gaps
from daqkit.dqc import dqc_laplace_model, dqc_ode_model, grid_1d, grid_2d, train_dqc_laplace, train_dqc_ode
from daqkit.hamiltonian import hamiltonian_factory, total_magnetization
from daqkit.optimize import TrainConfig
from daqkit.qubo import (
    EXAMPLE_Q,
    QuboProblem,
    brute_force,
    counts_cost,
    embed_qubo,
    qaoa_model,
    solution_frequency,
    train_qaoa,
)
from daqkit.register import Register
from daqkit.simulator import run, sample, to_matrix
from daqkit.symexpr import FeatureParameter, acos

from oracles import PX, PY, PZ, chebyshev_rx_derivative, bit_reversal, brute_gaps, dft, embed, phase_error, qubo_costs, zz_matrix

RESULTS: list[str] = []


def _report(num: int, title: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] {num} {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def criterion_1() -> bool:
    t0 = time.perf_counter()
    u = to_matrix(build_qft(range(3)), 3)
    err = float(np.max(np.abs(u - bit_reversal(3) @ dft(3))))
    dt = time.perf_counter() - t0
    return _report(1, "QFT vs DFT", err <= 1e-10 and dt < 1.0, f"max-abs {err:.2e} (<= 1e-10), {dt:.3f} s (< 1 s)")


def criterion_2() -> bool:
    t0 = time.perf_counter()
    x = FeatureParameter("x")
    n = 4
    circ = QuantumCircuit(n, kron(RX(i, (i + 1) * acos(x)) for i in range(n)))
    xs = np.random.default_rng(0).uniform(-0.99, 0.99, 10)
    grads = [
        compute_gradient(GradientRequest(circ, total_magnetization(n), {"x": xs}, ["x"], m))["x"][:, 0]
        for m in (DiffMode.GPSR, DiffMode.ADJOINT, DiffMode.FD)
    ]
    dev = max(float(np.max(np.abs(a - b))) for a, b in itertools.combinations(grads, 2))
    ref = float(np.max(np.abs(grads[0] - chebyshev_rx_derivative(xs, n))))
    dt = time.perf_counter() - t0
    ok = dev <= 1e-5 and dt < 5.0
    return _report(2, "GPSR/adjoint/FD agreement", ok, f"max pairwise {dev:.2e} (<= 1e-5), GPSR vs closed form {ref:.1e}, {dt:.2f} s (< 5 s)")


def criterion_3() -> bool:
    gen = kron(Z(0), Z(1)) + Z(1)
    gaps = spectral_gaps(gen, 2)
    oracle = brute_gaps(embed({0: PZ, 1: PZ}, 2) + embed({1: PZ}, 2))
    gaps_ok = np.allclose(gaps, oracle) and np.allclose(gaps, [2.0, 4.0])
    xs = np.random.default_rng(1).uniform(-np.pi, np.pi, 20)
    g = compute_gradient(GradientRequest(QuantumCircuit(1, RX(0, "x")), Z(0), {"x": xs}, ["x"]))["x"][:, 0]
    err = float(np.max(np.abs(g + np.sin(xs))))
    return _report(3, "GPSR spectrum and RX rule", gaps_ok and err <= 1e-8, f"gaps {gaps.tolist()}, max |g + sin x| {err:.1e} (<= 1e-8)")


def criterion_4() -> bool:
    t0 = time.perf_counter()
    reg = Register.triangular_lattice(2, 2, spacing=2.0)
    strengths = [1.0 / reg.distances[p] for p in reg.all_node_pairs]
    build = hamiltonian_factory(reg, "NN", strengths, detuning=X, detuning_strength="d", use_all_node_pairs=True)
    target = kron(N(0), N(1)) + kron(N(1), N(2)) + kron(N(2), N(0))
    n = reg.n_qubits
    sol = solve_daqc(n, target, 5.0, build)
    worst = phase_error(to_matrix(sol.block, n), expm(-5.0j * to_matrix(target, n)))
    sample_err = worst
    rng = np.random.default_rng(2024)
    for k in range(20):
        m = 3 + k % 2
        pairs = list(itertools.combinations(range(m), 2))
        g = {p: rng.uniform(0.05, 1.0) * rng.choice([-1, 1]) for p in pairs}
        h = {p: rng.uniform(0.2, 2.0) for p in pairs}
        tf = rng.uniform(0.5, 2.0)
        tgt = hamiltonian_factory(m, "ZZ", [g[p] for p in pairs], use_all_node_pairs=True)
        bld = hamiltonian_factory(m, "ZZ", [h[p] for p in pairs], use_all_node_pairs=True)
        u = to_matrix(solve_daqc(m, tgt, tf, bld).block, m)
        worst = max(worst, phase_error(u, expm(-1j * tf * zz_matrix(g, {}, m))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 30.0
    return _report(4, "sDAQC transform", ok, f"9-qubit sample {sample_err:.1e}, worst over 21 instances {worst:.1e} (<= 1e-8), {dt:.1f} s (< 30 s)")


def criterion_5() -> bool:
    u = to_matrix(build_da_qft(3, Strategy.SDAQC, complete_graph_zz(3)), 3)
    err = phase_error(u, to_matrix(build_qft(range(3)), 3))
    return _report(5, "DA-QFT vs digital QFT", err <= 1e-7, f"phase-aligned max-abs {err:.1e} (<= 1e-7)")


def criterion_6() -> bool:
    t0 = time.perf_counter()
    model = dqc_ode_model(4, 3, seed=0)
    train_dqc_ode(model, TrainConfig(1000, 0.01, seed=0), n_points=20)
    x, pred, exact = grid_1d(model, 100)
    mx = float(np.max(np.abs(pred - exact)))
    mse = float(np.mean((pred - exact) ** 2))
    dt = time.perf_counter() - t0
    ok = mx <= 0.1 and mse <= 1e-2 and dt < 600
    return _report(6, "DQC ODE", ok, f"max-abs {mx:.4f} (<= 0.1), MSE {mse:.2e} (<= 1e-2), {dt:.0f} s (< 600 s)")


def criterion_7() -> bool:
    t0 = time.perf_counter()
    model = dqc_laplace_model(4, 3, seed=0)
    res, history = train_dqc_laplace(model, TrainConfig(1000, 0.01, seed=0), n_points=100)
    _, _, pred, exact = grid_2d(model, 150)
    mse = float(np.mean((pred - exact) ** 2))
    drop = history[0]["interior"] / max(history[-1]["interior"], 1e-300)
    dt = time.perf_counter() - t0
    ok = (mse <= 5e-2 or drop >= 10.0) and dt < 1800
    return _report(
        7, "DQC Laplace", ok,
        f"grid MSE {mse:.4f} (<= 5e-2), interior residual drop {drop:.0f}x (fallback >= 10x), {dt:.0f} s (< 1800 s)",
    )


def criterion_8() -> bool:
    sols, best = brute_force(EXAMPLE_Q)
    costs = qubo_costs(EXAMPLE_Q)
    ranked = sorted(costs.values())
    a = sols == ["00111", "01011"] and abs(costs["01011"] - costs["00111"]) <= 1e-12 and ranked[2] > ranked[1] + 1e-9
    q = QuboProblem(EXAMPLE_Q, n_shots=1000, n_layers=2)
    reg = embed_qubo(q.Q, seed=0)
    model = qaoa_model(reg, q.n_layers, seed=0)
    initial = model.sample({}, q.n_shots, seed=0)[0]
    train_qaoa(model, q, TrainConfig(100, optimizer="gradient_free", seed=0))
    final = model.sample({}, q.n_shots, seed=1)[0]
    c0, c1 = counts_cost(initial, q.Q), counts_cost(final, q.Q)
    f0, f1 = solution_frequency(initial, sols), solution_frequency(final, sols)
    ok = a and c1 < c0 and f1 > f0
    return _report(
        8, "QUBO QAOA", ok,
        f"(a) minima {sols} at {best:.6f}; (b) sampled cost {c0:.3f} -> {c1:.3f}; (c) optimum frequency {f0:.3f} -> {f1:.3f}",
    )


def _random_circuit(rng, n, depth=6):
    ops = []
    for _ in range(depth):
        q = int(rng.integers(n))
        kind = rng.integers(5)
        if kind == 0:
            ops.append(RX(q, rng.uniform(-np.pi, np.pi)))
        elif kind == 1:
            ops.append(RY(q, rng.uniform(-np.pi, np.pi)))
        elif kind == 2:
            ops.append(RZ(q, rng.uniform(-np.pi, np.pi)))
        elif kind == 3:
            ops.append(H(q))
        else:
            t = int((q + 1 + rng.integers(n - 1)) % n)
            ops.append(CNOT(q, t) if rng.random() < 0.5 else CZ(q, t))
    return chain(ops)


def criterion_9() -> bool:
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    paulis = {"X": PX, "Y": PY, "Z": PZ}
    ctor = {"X": X, "Y": Y, "Z": Z}
    fails = []
    for _ in range(100):
        n = int(rng.integers(2, 5))
        # norm preservation
        psi = run(QuantumCircuit(n, _random_circuit(rng, n)))
        if abs(np.linalg.norm(psi) - 1) > 1e-10:
            fails.append("norm")
        # chain(A, B) == M_B M_A and kron of disjoint blocks == Kronecker product
        a, b = _random_circuit(rng, n, 3), _random_circuit(rng, n, 3)
        if np.max(np.abs(to_matrix(chain(a, b), n) - to_matrix(b, n) @ to_matrix(a, n))) > 1e-10:
            fails.append("chain")
        p1, p2 = rng.choice(list(paulis), 2)
        km = to_matrix(kron(ctor[p1](0), ctor[p2](1)), 2)
        if np.max(np.abs(km - np.kron(paulis[p1], paulis[p2]))) > 1e-12:
            fails.append("kron")
        # two half-steps equal one full step
        gen = kron(Z(0), Z(1)) * rng.uniform(-2, 2) + X(1) * rng.uniform(-2, 2)
        t = rng.uniform(-2, 2)
        half = to_matrix(hamevo(gen, t / 2), 2)
        if np.max(np.abs(half @ half - to_matrix(hamevo(gen, t), 2))) > 1e-10:
            fails.append("hamevo")
        # sampling is a pure function of the seed
        circ = QuantumCircuit(n, _random_circuit(rng, n))
        seed = int(rng.integers(2**31))
        if sample(circ, n_shots=50, seed=seed) != sample(circ, n_shots=50, seed=seed):
            fails.append("sample")
    dt = time.perf_counter() - t0
    ok = not fails and dt < 60.0
    detail = "norm, chain, kron, half-step, sampling seed: 100 cases each"
    return _report(9, "Simulator invariants", ok, f"{detail}, {len(fails)} failures, {dt:.1f} s (< 60 s)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_acceptance(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
