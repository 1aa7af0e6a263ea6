"""Dense statevector simulator.

States are complex arrays of shape ``(batch, 2**n)``; the batch axis runs over
parameter valuations. Qubit 0 is the most significant bit of the index.

Circuits are first flattened into a :class:`Program`, a list of gate and
evolution operations. Each operation has an index so callers can shift the
angle of one occurrence, which is what the shift-rule differentiation needs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence, Union

import numpy as np

from daqkit.blocks import (
    AddBlock,
    Block,
    ChainBlock,
    GateKind,
    HamEvo,
    KronBlock,
    PrimitiveBlock,
    QuantumCircuit,
    ScaleBlock,
)
from daqkit.errors import (
    BadBitstring,
    NonHermitianGenerator,
    NonHermitianObservable,
    NonUnitaryBlockInCircuit,
    TooManyQubitsForDense,
)
from daqkit.symexpr import Expression, evaluate, free_names

MAX_DENSE_QUBITS = 12
Values = Mapping[str, Union[float, np.ndarray]]

_SQ2 = 1.0 / np.sqrt(2.0)
FIXED_MATRICES = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.N: np.array([[0, 0], [0, 1]], dtype=complex),
    GateKind.I: np.eye(2, dtype=complex),
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
}

# U(theta) = exp(-i theta/2 G) for the parametric gates
GENERATORS = {
    GateKind.RX: FIXED_MATRICES[GateKind.X],
    GateKind.RY: FIXED_MATRICES[GateKind.Y],
    GateKind.RZ: FIXED_MATRICES[GateKind.Z],
    GateKind.CPHASE: np.diag([0, 0, 0, -2]).astype(complex),
}


def gate_matrix(kind: GateKind, angle: float | np.ndarray | None = None) -> np.ndarray:
    """Gate matrix with a leading batch axis: shape (batch, d, d)."""
    if kind in FIXED_MATRICES:
        return FIXED_MATRICES[kind][None]
    theta = np.atleast_1d(np.asarray(angle, dtype=float))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind is GateKind.RX:
        m = np.empty((theta.size, 2, 2), dtype=complex)
        m[:, 0, 0] = m[:, 1, 1] = c
        m[:, 0, 1] = m[:, 1, 0] = -1j * s
        return m
    if kind is GateKind.RY:
        m = np.empty((theta.size, 2, 2), dtype=complex)
        m[:, 0, 0] = m[:, 1, 1] = c
        m[:, 0, 1] = -s
        m[:, 1, 0] = s
        return m
    if kind is GateKind.RZ:
        m = np.zeros((theta.size, 2, 2), dtype=complex)
        m[:, 0, 0] = np.exp(-0.5j * theta)
        m[:, 1, 1] = np.exp(0.5j * theta)
        return m
    if kind is GateKind.CPHASE:
        m = np.zeros((theta.size, 4, 4), dtype=complex)
        m[:, 0, 0] = m[:, 1, 1] = m[:, 2, 2] = 1.0
        m[:, 3, 3] = np.exp(1j * theta)
        return m
    raise ValueError(f"no matrix for {kind}")


# --------------------------------------------------------------------------
# low-level application


def _lift(arr: np.ndarray, lead_ndim: int, core_ndim: int) -> np.ndarray:
    """Insert singleton axes so a (batch, *core) array broadcasts over extra lead axes."""
    extra = lead_ndim - (arr.ndim - core_ndim)
    if extra <= 0:
        return arr
    return arr.reshape(arr.shape[:1] + (1,) * extra + arr.shape[1:])


def apply_matrix(psi: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Apply a (batch, d, d) matrix on ``qubits`` of ``psi`` with shape (*lead, 2**n)."""
    k = len(qubits)
    lead = psi.shape[:-1]
    t = psi.reshape(lead + (2,) * n_qubits)
    src = [len(lead) + q for q in qubits]
    dst = list(range(t.ndim - k, t.ndim))
    t = np.moveaxis(t, src, dst)
    moved = t.shape
    t = t.reshape(lead + (-1, 2**k))
    m = _lift(mat, len(lead), 2)
    out = np.matmul(t, np.swapaxes(m, -1, -2))
    out_lead = out.shape[: len(lead)]
    out = out.reshape(out_lead + moved[len(lead):])
    return np.moveaxis(out, dst, src).reshape(out_lead + (2**n_qubits,))


def _as_batch(x: float | np.ndarray) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _scale(psi: np.ndarray, coeff: float | np.ndarray) -> np.ndarray:
    c = _as_batch(coeff)
    if c.size == 1:
        return psi * c[0]
    return psi * _lift(c, psi.ndim - 1, 0)[..., None]


# --------------------------------------------------------------------------
# Hamiltonian evolution


@dataclass
class Spectrum:
    eigvals: np.ndarray  # (batch, d)
    eigvecs: np.ndarray | None  # (batch, d, d); None when diagonal

    def unitary(self, time: float | np.ndarray) -> np.ndarray:
        t = _as_batch(time)[:, None]
        phases = np.exp(-1j * self.eigvals * t)  # broadcast (batch, d)
        if self.eigvecs is None:
            d = phases.shape[-1]
            u = np.zeros(phases.shape[:1] + (d, d), dtype=complex)
            idx = np.arange(d)
            u[:, idx, idx] = phases
            return u
        v = self.eigvecs
        if v.shape[0] == 1:
            return np.einsum("ij,bj,kj->bik", v[0], phases, v[0].conj())
        if phases.shape[0] != v.shape[0]:
            phases = np.broadcast_to(phases, (v.shape[0], phases.shape[-1]))
        return np.einsum("bij,bj,bkj->bik", v, phases, v.conj())


def hermitian_spectrum(mat: np.ndarray, tol: float = 1e-10) -> Spectrum:
    """Eigendecomposition of a (batch, d, d) Hermitian matrix."""
    if np.max(np.abs(mat - np.conj(np.swapaxes(mat, -1, -2))), initial=0.0) > tol * max(
        1.0, float(np.max(np.abs(mat), initial=0.0))
    ):
        raise NonHermitianGenerator("generator matrix is not Hermitian")
    off = mat.copy()
    idx = np.arange(mat.shape[-1])
    off[:, idx, idx] = 0
    if not np.any(off):
        return Spectrum(np.real(mat[:, idx, idx]), None)
    w, v = np.linalg.eigh(mat)
    return Spectrum(w, v)


def local_matrix(block: Block, qubits: Sequence[int], values: Values | None = None) -> np.ndarray:
    """Dense matrix of ``block`` on the ordered ``qubits``: shape (batch, d, d)."""
    qubits = list(qubits)
    pos = {q: i for i, q in enumerate(qubits)}
    k = len(qubits)
    d = 2**k
    basis = np.eye(d, dtype=complex)[None]  # lead (1, d)
    out = apply_operator(_relabel(block, pos), basis, values or {}, k)
    return np.swapaxes(out, -1, -2)


def _relabel(block: Block, pos: dict[int, int]) -> Block:
    from dataclasses import replace

    if isinstance(block, PrimitiveBlock):
        return replace(block, support=tuple(pos[q] for q in block.support))
    if isinstance(block, HamEvo):
        return replace(block, generator=_relabel(block.generator, pos))
    if isinstance(block, ScaleBlock):
        return replace(block, block=_relabel(block.block, pos))
    if isinstance(block, (ChainBlock, KronBlock, AddBlock)):
        return replace(block, blocks=tuple(_relabel(b, pos) for b in block.blocks))
    raise NonUnitaryBlockInCircuit(f"cannot relabel {type(block).__name__}")


_DIAGONAL_GATES = {GateKind.Z, GateKind.N, GateKind.I, GateKind.RZ, GateKind.CZ, GateKind.CPHASE}


def _is_diagonal(block: Block) -> bool:
    for b in block.walk():
        if isinstance(b, PrimitiveBlock) and b.gate not in _DIAGONAL_GATES:
            return False
        if not isinstance(b, (PrimitiveBlock, ChainBlock, KronBlock, AddBlock, ScaleBlock)):
            return False
    return True


def _spectrum(gen: Block, values: Values) -> Spectrum:
    qubits = gen.qubit_support
    if _is_diagonal(gen):
        pos = {q: i for i, q in enumerate(qubits)}
        ones = np.ones((1, 2 ** len(qubits)), dtype=complex)
        diag = apply_operator(_relabel(gen, pos), ones, values, len(qubits))
        if np.max(np.abs(diag.imag), initial=0.0) > 1e-10 * max(1.0, float(np.max(np.abs(diag)))):
            raise NonHermitianGenerator("generator matrix is not Hermitian")
        return Spectrum(np.ascontiguousarray(diag.real), None)
    return hermitian_spectrum(local_matrix(gen, qubits, values))


@lru_cache(maxsize=256)
def _static_spectrum(gen: Block) -> Spectrum:
    return _spectrum(gen, {})


def evolution_spectrum(gen: Block, values: Values | None = None) -> tuple[tuple[int, ...], Spectrum]:
    """Eigen-data of a generator; parameter-free generators are cached."""
    if not gen.parameters():
        return gen.qubit_support, _static_spectrum(gen)
    return gen.qubit_support, _spectrum(gen, values or {})


def apply_diagonal(psi: np.ndarray, diag: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Multiply by a (batch, 2**k) diagonal acting on ``qubits``."""
    k = len(qubits)
    lead = psi.shape[:-1]
    t = psi.reshape(lead + (2,) * n_qubits)
    src = [len(lead) + q for q in qubits]
    dst = list(range(t.ndim - k, t.ndim))
    t = np.moveaxis(t, src, dst)
    dd = diag.reshape(diag.shape[:1] + (1,) * (len(lead) - 1 + n_qubits - k) + (2,) * k)
    out = t * dd
    out_lead = out.shape[: len(lead)]
    return np.moveaxis(out, dst, src).reshape(out_lead + (2**n_qubits,))


# --------------------------------------------------------------------------
# operator application (observables, generators, matrices)


def apply_operator(block: Block, psi: np.ndarray, values: Values, n_qubits: int) -> np.ndarray:
    """Apply any block as a linear operator; Add and Scale are allowed here."""
    if isinstance(block, PrimitiveBlock):
        angle = None if block.angle is None else evaluate(block.angle, values)
        return apply_matrix(psi, gate_matrix(block.gate, angle), block.support, n_qubits)
    if isinstance(block, HamEvo):
        qubits, spec = evolution_spectrum(block.generator, values)
        t = evaluate(block.time, values)
        if spec.eigvecs is None:
            phases = np.exp(-1j * spec.eigvals * _as_batch(t)[:, None])
            return apply_diagonal(psi, phases, qubits, n_qubits)
        return apply_matrix(psi, spec.unitary(t), qubits, n_qubits)
    if isinstance(block, (ChainBlock, KronBlock)):
        for b in block.blocks:
            psi = apply_operator(b, psi, values, n_qubits)
        return psi
    if isinstance(block, AddBlock):
        out = apply_operator(block.blocks[0], psi, values, n_qubits)
        for b in block.blocks[1:]:
            out = out + apply_operator(b, psi, values, n_qubits)
        return out
    if isinstance(block, ScaleBlock):
        return _scale(apply_operator(block.block, psi, values, n_qubits), evaluate(block.coeff, values))
    lower = getattr(block, "lower", None)
    if lower is not None:
        raise NonUnitaryBlockInCircuit(
            f"{type(block).__name__} needs a register; lower it or wrap it in a QuantumCircuit"
        )
    raise TypeError(f"unknown block {type(block).__name__}")


def to_matrix(block: Block, n_qubits: int | None = None, values: Values | None = None) -> np.ndarray:
    """Dense 2**n x 2**n matrix of ``block``, built column by column."""
    n = block.n_qubits if n_qubits is None else n_qubits
    if n > MAX_DENSE_QUBITS:
        raise TooManyQubitsForDense(f"{n} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")
    if any(q >= n for q in block.qubit_support):
        raise ValueError("block acts outside the requested qubit count")
    mats = local_matrix(block, range(n), values)
    if mats.shape[0] == 1:
        return mats[0]
    return mats


# --------------------------------------------------------------------------
# programs


@dataclass
class GateOp:
    index: int
    kind: GateKind
    qubits: tuple[int, ...]
    angle: Expression | None

    @property
    def parametric(self) -> bool:
        return self.angle is not None

    def matrix(self, angle: float | np.ndarray | None) -> np.ndarray:
        return gate_matrix(self.kind, angle)


@dataclass
class EvoOp:
    index: int
    generator: Block
    time: Expression
    qubits: tuple[int, ...]
    static: Spectrum | None = None

    @property
    def parametric(self) -> bool:
        return True

    def spectrum(self, values: Values) -> Spectrum:
        if self.static is not None:
            return self.static
        return hermitian_spectrum(local_matrix(self.generator, self.qubits, values))

    def matrix(self, time: float | np.ndarray, values: Values) -> np.ndarray:
        return self.spectrum(values).unitary(time)


Op = Union[GateOp, EvoOp]


@dataclass
class Program:
    n_qubits: int
    ops: list[Op] = field(default_factory=list)

    def angle_expression(self, index: int) -> Expression:
        op = self.ops[index]
        return op.time if isinstance(op, EvoOp) else op.angle

    def occurrences(self, name: str) -> list[int]:
        """Indices of ops whose angle/time depends on parameter ``name``."""
        return [
            op.index
            for op in self.ops
            if op.parametric and name in free_names(self.angle_expression(op.index))
        ]

    def generator_names(self) -> set[str]:
        """Parameters hidden inside evolution generators."""
        names: set[str] = set()
        for op in self.ops:
            if isinstance(op, EvoOp) and op.static is None:
                for b in op.generator.walk():
                    for e in b.expressions():
                        names |= free_names(e)
        return names

    def op_angle(self, op: Op, values: Values, shifts: Mapping[int, float | np.ndarray] | None):
        expr = op.time if isinstance(op, EvoOp) else op.angle
        if expr is None:
            return None
        val = evaluate(expr, values)
        if shifts and op.index in shifts:
            val = val + shifts[op.index]
        return val

    def op_matrix(self, op: Op, values: Values, shifts=None) -> np.ndarray:
        angle = self.op_angle(op, values, shifts)
        if isinstance(op, EvoOp):
            return op.matrix(angle, values)
        return op.matrix(angle)

    def run(
        self,
        values: Values,
        state: np.ndarray | None = None,
        shifts: Mapping[int, float | np.ndarray] | None = None,
    ) -> np.ndarray:
        psi = initial_state(self.n_qubits, state)
        for op in self.ops:
            psi = apply_matrix(psi, self.op_matrix(op, values, shifts), op.qubits, self.n_qubits)
        return psi


def compile_block(block: Block, n_qubits: int, register=None) -> Program:
    """Flatten a unitary block into a :class:`Program`."""
    prog = Program(n_qubits)

    def rec(b: Block) -> None:
        if isinstance(b, PrimitiveBlock):
            if b.gate is GateKind.N:
                raise NonUnitaryBlockInCircuit("the number operator is not unitary")
            prog.ops.append(GateOp(len(prog.ops), b.gate, b.support, b.angle))
        elif isinstance(b, HamEvo):
            qubits = b.generator.qubit_support
            static = None
            gen_names = set()
            for g in b.generator.walk():
                for e in g.expressions():
                    gen_names |= free_names(e)
            if not gen_names:
                static = hermitian_spectrum(local_matrix(b.generator, qubits, {}))
            prog.ops.append(EvoOp(len(prog.ops), b.generator, b.time, qubits, static))
        elif isinstance(b, (ChainBlock, KronBlock)):
            for c in b.blocks:
                rec(c)
        elif isinstance(b, (AddBlock, ScaleBlock)):
            raise NonUnitaryBlockInCircuit(
                f"{type(b).__name__} is only valid inside generators and observables"
            )
        elif hasattr(b, "lower"):
            if register is None:
                raise NonUnitaryBlockInCircuit(f"{type(b).__name__} needs a register to lower")
            rec(b.lower(register))
        else:
            raise TypeError(f"unknown block {type(b).__name__}")

    rec(block)
    return prog


def compile_circuit(circuit: QuantumCircuit) -> Program:
    return compile_block(circuit.block, circuit.n_qubits, circuit.register)


# --------------------------------------------------------------------------
# states, sampling, expectation


def prepare_state(spec: str | None, n_qubits: int | None = None) -> np.ndarray:
    """Product state from a bitstring (qubit 0 leftmost), or |0...0> for None."""
    if spec is None:
        if n_qubits is None:
            raise BadBitstring("zero state needs n_qubits")
        return zero_state(n_qubits)
    if n_qubits is None:
        n_qubits = len(spec)
    if len(spec) != n_qubits or any(c not in "01" for c in spec):
        raise BadBitstring(f"bad bitstring {spec!r} for {n_qubits} qubits")
    psi = np.zeros((1, 2**n_qubits), dtype=complex)
    psi[0, int(spec, 2)] = 1.0
    return psi


def product_state(bitstring: str) -> np.ndarray:
    return prepare_state(bitstring, len(bitstring))


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros((1, 2**n_qubits), dtype=complex)
    psi[0, 0] = 1.0
    return psi


def initial_state(n_qubits: int, state: np.ndarray | None) -> np.ndarray:
    if state is None:
        return zero_state(n_qubits)
    psi = np.asarray(state, dtype=complex)
    if psi.ndim == 1:
        psi = psi[None]
    if psi.shape[-1] != 2**n_qubits:
        raise BadBitstring(f"state has {psi.shape[-1]} amplitudes, expected {2**n_qubits}")
    return psi


def _program(circuit: QuantumCircuit | Program) -> Program:
    return circuit if isinstance(circuit, Program) else compile_circuit(circuit)


def run(circuit: QuantumCircuit | Program, values: Values | None = None, state=None) -> np.ndarray:
    """Final state, shape (batch, 2**n)."""
    return _program(circuit).run(values or {}, state)


def check_observable(obs: Block) -> None:
    for b in obs.walk():
        if isinstance(b, HamEvo) or (isinstance(b, PrimitiveBlock) and b.angle is not None):
            raise NonHermitianObservable(f"{type(b).__name__} is not a Hermitian observable term")


def expectation_from_state(psi: np.ndarray, observable: Block, values: Values, n_qubits: int) -> np.ndarray:
    o_psi = apply_operator(observable, psi, values, n_qubits)
    ev = np.sum(np.conj(psi) * o_psi, axis=-1)
    scale = max(1.0, float(np.max(np.abs(ev), initial=0.0)))
    if np.max(np.abs(ev.imag), initial=0.0) > 1e-10 * scale:
        raise NonHermitianObservable("expectation value has an imaginary part")
    return ev.real


def expectation(
    circuit: QuantumCircuit | Program,
    observable: Block | Sequence[Block],
    values: Values | None = None,
    state=None,
) -> np.ndarray:
    """Expectation values with shape (batch, n_observables)."""
    prog = _program(circuit)
    obs = [observable] if isinstance(observable, Block) else list(observable)
    for o in obs:
        check_observable(o)
    values = values or {}
    psi = prog.run(values, state)
    cols = [np.broadcast_to(expectation_from_state(psi, o, values, prog.n_qubits), psi.shape[:1]) for o in obs]
    return np.stack(cols, axis=-1)


def probabilities(psi: np.ndarray) -> np.ndarray:
    p = np.abs(psi) ** 2
    return p / p.sum(axis=-1, keepdims=True)


def sample_state(psi: np.ndarray, n_shots: int, rng: np.random.Generator, n_qubits: int) -> list[dict[str, int]]:
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    out = []
    for p in probabilities(np.atleast_2d(psi)):
        counts = rng.multinomial(n_shots, p)
        nz = np.flatnonzero(counts)
        out.append(Counter({format(int(i), f"0{n_qubits}b"): int(counts[i]) for i in nz}))
    return out


def sample(
    circuit: QuantumCircuit | Program,
    values: Values | None = None,
    n_shots: int = 100,
    seed: int | None = None,
    state=None,
) -> list[dict[str, int]]:
    """Bitstring counts per batch entry, drawn with numpy's PCG64 generator."""
    prog = _program(circuit)
    psi = prog.run(values or {}, state)
    return sample_state(psi, n_shots, np.random.default_rng(seed), prog.n_qubits)


def phase_aligned_error(u: np.ndarray, v: np.ndarray) -> float:
    """Max-abs difference of two unitaries after removing a global phase."""
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    overlap = np.vdot(v, u)  # tr(V^dagger U)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(u - phase * v)))
