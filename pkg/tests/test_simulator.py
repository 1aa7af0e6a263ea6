import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from daqkit.blocks import CNOT, CPHASE, CZ, RX, RY, RZ, H, N, QuantumCircuit, X, Y, Z, add, chain, hamevo, kron, scale
from daqkit.errors import BadBitstring, NonHermitianObservable, NonUnitaryBlockInCircuit, TooManyQubitsForDense
from daqkit.hamiltonian import hamiltonian_factory, total_magnetization
from daqkit.register import Register
from daqkit.simulator import (
    expectation,
    phase_aligned_error,
    prepare_state,
    product_state,
    run,
    sample,
    to_matrix,
    zero_state,
)

from oracles import PX, PY, PZ, embed


def test_prepare_states():
    assert np.argmax(np.abs(product_state("1000"))) == 8
    assert np.argmax(np.abs(zero_state(3))) == 0
    assert np.argmax(np.abs(product_state("11"))) == 3
    with pytest.raises(BadBitstring):
        product_state("102")
    with pytest.raises(BadBitstring):
        prepare_state("10", 3)


def test_run_examples():
    assert np.allclose(run(QuantumCircuit(1, X(0)))[0], [0, 1])
    assert np.allclose(run(QuantumCircuit(1, chain(H(0))))[0], [2**-0.5, 2**-0.5])
    psi = run(QuantumCircuit(1, hamevo(X(0), np.pi / 2)))[0]
    assert np.allclose(psi, [0, -1j], atol=1e-12)


def test_non_unitary_rejected():
    with pytest.raises(NonUnitaryBlockInCircuit):
        run(QuantumCircuit(1, add(X(0), Z(0))))
    with pytest.raises(NonUnitaryBlockInCircuit):
        run(QuantumCircuit(1, N(0)))


def test_sampling():
    assert sample(QuantumCircuit(1, X(0)), n_shots=100, seed=1)[0] == {"1": 100}
    c = sample(QuantumCircuit(1, H(0)), n_shots=1000, seed=3)[0]
    assert sum(c.values()) == 1000
    sigma = np.sqrt(1000 * 0.25)
    assert all(abs(v - 500) <= 5 * sigma for v in c.values())
    assert sample(QuantumCircuit(1, H(0)), n_shots=1000, seed=3) == sample(QuantumCircuit(1, H(0)), n_shots=1000, seed=3)


def test_expectation_examples():
    c = QuantumCircuit(1, RX(0, 0.7))
    assert expectation(c, Z(0))[0, 0] == pytest.approx(0.7648421872844885, abs=1e-12)
    assert expectation(QuantumCircuit(4, chain()), total_magnetization(4))[0, 0] == pytest.approx(4.0)
    c2 = QuantumCircuit(1, RX(0, "phi"))
    out = expectation(c2, [Z(0), X(0)], {"phi": np.linspace(0, 1, 10)})
    assert out.shape == (10, 2)


def test_observable_must_be_hermitian():
    with pytest.raises(NonHermitianObservable):
        expectation(QuantumCircuit(1, H(0)), RX(0, 0.3))


def test_to_matrix_examples():
    assert np.allclose(to_matrix(X(0), 1), [[0, 1], [1, 0]])
    assert np.allclose(to_matrix(CPHASE(0, 1, np.pi), 2), np.diag([1, 1, 1, -1]))
    zz = hamiltonian_factory(Register.line(3), "ZZ")
    assert np.allclose(np.diag(to_matrix(zz, 3)), [2, 0, -2, 0, 0, -2, 0, 2])
    with pytest.raises(TooManyQubitsForDense):
        to_matrix(X(0), 13)


def test_phase_aligned_error():
    u = expm(-1j * 0.3 * PX)
    assert phase_aligned_error(np.exp(0.7j) * u, u) <= 1e-14
    assert phase_aligned_error(u, np.eye(2)) > 0.1


# random circuits for the invariant suite

GATES_1Q = [X, Y, Z, H]
ROT = [RX, RY, RZ]


@st.composite
def circuits(draw, n=3, max_ops=8):
    ops = []
    for _ in range(draw(st.integers(1, max_ops))):
        kind = draw(st.integers(0, 3))
        q = draw(st.integers(0, n - 1))
        if kind == 0:
            ops.append(draw(st.sampled_from(GATES_1Q))(q))
        elif kind == 1:
            ops.append(draw(st.sampled_from(ROT))(q, draw(st.floats(-np.pi, np.pi))))
        elif kind == 2:
            r = draw(st.integers(0, n - 1).filter(lambda v: v != q))
            ops.append(draw(st.sampled_from([CNOT, CZ]))(q, r))
        else:
            r = draw(st.integers(0, n - 1).filter(lambda v: v != q))
            ops.append(CPHASE(q, r, draw(st.floats(-np.pi, np.pi))))
    return chain(ops)


@st.composite
def hermitian_generators(draw, n=3):
    paulis = [X, Y, Z]
    terms = []
    for _ in range(draw(st.integers(1, 4))):
        qs = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=2, unique=True))
        body = kron(draw(st.sampled_from(paulis))(q) for q in qs)
        terms.append(scale(draw(st.floats(-2, 2)), body))
    return add(terms)


def _dense_reference(block, n):
    """Gate-by-gate product with explicit Kronecker embeddings."""
    from oracles import HAD, controlled, cphase, rx, ry, rz

    fixed = {"X": PX, "Y": PY, "Z": PZ, "H": HAD}
    u = np.eye(2**n, dtype=complex)
    for g in block.blocks:
        kind = g.gate.value
        if kind in fixed:
            m = embed({g.support[0]: fixed[kind]}, n)
        elif kind in ("RX", "RY", "RZ"):
            t = float(g.angle.value)
            m = embed({g.support[0]: {"RX": rx, "RY": ry, "RZ": rz}[kind](t)}, n)
        elif kind == "CNOT":
            m = controlled(PX, g.support[0], g.support[1], n)
        elif kind == "CZ":
            m = controlled(PZ, g.support[0], g.support[1], n)
        else:
            m = cphase(g.support[0], g.support[1], float(g.angle.value), n)
        u = m @ u
    return u


@settings(max_examples=100, deadline=None)
@given(circuits())
def test_norm_preserved_and_matches_reference(block):
    psi = run(QuantumCircuit(3, block))
    assert abs(np.linalg.norm(psi[0]) - 1) <= 1e-10
    assert np.max(np.abs(to_matrix(block, 3) - _dense_reference(block, 3))) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(circuits(), circuits())
def test_chain_is_sequential_run(a, b):
    direct = run(QuantumCircuit(3, chain(a, b)))
    psi_a = run(QuantumCircuit(3, a))
    staged = run(QuantumCircuit(3, b), state=psi_a)
    assert np.max(np.abs(direct - staged)) <= 1e-12
    assert np.allclose(to_matrix(chain(a, b), 3), to_matrix(b, 3) @ to_matrix(a, 3), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(circuits(n=2, max_ops=4), circuits(n=1, max_ops=4))
def test_kron_is_tensor_product(a, b):
    from daqkit.blocks import ChainBlock
    from dataclasses import replace

    shifted = chain(replace(g, support=tuple(q + 2 for q in g.support)) for g in b.blocks)
    m = to_matrix(kron(a, shifted), 3)
    assert np.allclose(m, np.kron(to_matrix(a, 2), to_matrix(b, 1)), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(hermitian_generators(), st.floats(-3, 3))
def test_hamevo_half_steps(gen, t):
    full = to_matrix(hamevo(gen, t), 3)
    half = to_matrix(chain(hamevo(gen, t / 2), hamevo(gen, t / 2)), 3)
    assert np.max(np.abs(full - half)) <= 1e-10
    ref = expm(-1j * t * to_matrix(gen, 3))
    assert np.max(np.abs(full - ref)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(circuits(), hermitian_generators(), hermitian_generators(), st.floats(-2, 2), st.floats(-2, 2))
def test_expectation_linearity(block, o1, o2, a, b):
    c = QuantumCircuit(3, block)
    lhs = expectation(c, add(scale(a, o1), scale(b, o2)))[0, 0]
    rhs = a * expectation(c, o1)[0, 0] + b * expectation(c, o2)[0, 0]
    assert abs(lhs - rhs) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(circuits(), st.integers(0, 2**31))
def test_sampling_determinism_and_convergence(block, seed):
    c = QuantumCircuit(3, block)
    s1 = sample(c, n_shots=10_000, seed=seed)[0]
    assert s1 == sample(c, n_shots=10_000, seed=seed)[0]
    p = np.abs(run(c)[0]) ** 2
    emp = np.zeros(8)
    for k, v in s1.items():
        emp[int(k, 2)] = v / 10_000
    assert 0.5 * np.sum(np.abs(emp - p)) <= 0.05
