"""Circuit differentiation: generalized parameter shift, adjoint, finite differences.

Every engine returns derivatives of expectation values with respect to
user-level parameter names. Gate angles are linked to those names through
expressions, so each engine applies the chain rule with
:func:`daqkit.symexpr.differentiate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from daqkit.blocks import Block, QuantumCircuit
from daqkit.errors import (
    AnalogBlockInAdjoint,
    IllConditionedShifts,
    NonHermitianGenerator,
    UnsupportedDerivative,
)
from daqkit.simulator import (
    GENERATORS,
    EvoOp,
    GateOp,
    Program,
    Values,
    apply_matrix,
    apply_operator,
    check_observable,
    compile_circuit,
    initial_state,
    local_matrix,
    to_matrix,
)
from daqkit.symexpr import Const, Expression, differentiate, evaluate, free_names, to_sexpr

GAP_TOL = 1e-8
MAX_SHIFT_CONDITION = 1e10


class DiffMode(str, Enum):
    GPSR = "gpsr"
    ADJOINT = "adjoint"
    FD = "fd"


# --------------------------------------------------------------------------
# spectral machinery


def _dedupe(values: np.ndarray, tol: float = GAP_TOL) -> np.ndarray:
    out: list[float] = []
    for d in np.sort(values[values > tol]):
        if not out or d - out[-1] > tol:
            out.append(float(d))
    return np.asarray(out)


def unique_gaps(eigvals: np.ndarray, tol: float = GAP_TOL) -> np.ndarray:
    ev = np.sort(np.real(np.asarray(eigvals)).ravel())
    diffs = np.abs(ev[:, None] - ev[None, :])[np.triu_indices(ev.size, k=1)]
    return _dedupe(diffs, tol)


def spectral_gaps(generator: Block | np.ndarray, n_qubits: int | None = None, values: Values | None = None) -> np.ndarray:
    """Sorted unique positive differences between generator eigenvalues."""
    if isinstance(generator, Block):
        mat = to_matrix(generator, n_qubits, values)
    else:
        mat = np.asarray(generator)
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(mat))):
        raise NonHermitianGenerator("generator is not Hermitian")
    return unique_gaps(np.linalg.eigvalsh(mat))


@dataclass
class GpsrContext:
    """Shift rule for one gate occurrence with U(x) = exp(-i x/2 G)."""

    gaps: np.ndarray
    shifts: np.ndarray
    shift_matrix: np.ndarray
    weights: np.ndarray  # derivative = sum_m weights[m] * (f(x+d_m) - f(x-d_m))
    generator: np.ndarray | None = None

    @property
    def n_terms(self) -> int:
        return len(self.gaps)


def default_shifts(gaps: np.ndarray) -> np.ndarray:
    s = len(gaps)
    return np.arange(1, s + 1) * np.pi / (s * float(np.max(gaps)))


def shift_system(gaps: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """M[m, s] = 4 sin(gap_s * shift_m / 2)."""
    return 4.0 * np.sin(np.outer(shifts, gaps) / 2.0)


def gpsr_context(gaps: Sequence[float], shifts: Sequence[float] | None = None, generator=None) -> GpsrContext:
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size == 0:
        empty = np.zeros(0)
        return GpsrContext(gaps, empty, np.zeros((0, 0)), empty, generator)
    trial = default_shifts(gaps) if shifts is None else np.asarray(shifts, dtype=float)
    for attempt in range(2):
        m = shift_system(gaps, trial)
        if np.linalg.cond(m) <= MAX_SHIFT_CONDITION:
            weights = np.linalg.solve(m.T, gaps)
            return GpsrContext(gaps, trial, m, weights, generator)
        if attempt == 0:
            trial = trial * (1.0 + 1e-3)
    raise IllConditionedShifts(f"shift system for gaps {gaps} is ill-conditioned")


def gpsr_derivative(f, x: float, gaps: Sequence[float], shifts: Sequence[float] | None = None) -> float:
    """Derivative of a scalar function that is band-limited to the given gaps."""
    ctx = gpsr_context(gaps, shifts)
    return float(sum(w * (f(x + d) - f(x - d)) for w, d in zip(ctx.weights, ctx.shifts)))


class ShiftRules:
    """Per-occurrence shift-rule contexts of a compiled program (cached)."""

    def __init__(self, program: Program):
        self.program = program
        self._cache: dict[int, GpsrContext] = {}

    def generator(self, index: int, values: Values) -> np.ndarray:
        op = self.program.ops[index]
        if isinstance(op, GateOp):
            return GENERATORS[op.kind][None]
        # exp(-i t H) = exp(-i t/2 (2H))
        return 2.0 * local_matrix(op.generator, op.qubits, values)

    def context(self, index: int, values: Values) -> GpsrContext:
        if index in self._cache:
            return self._cache[index]
        op = self.program.ops[index]
        gens = self.generator(index, values)
        # a union over batch entries keeps one rule valid for every entry
        gaps = _dedupe(np.concatenate([unique_gaps(np.linalg.eigvalsh(g)) for g in gens]))
        ctx = gpsr_context(gaps, generator=gens[0])
        if not (isinstance(op, EvoOp) and op.static is None):
            self._cache[index] = ctx
        return ctx


# --------------------------------------------------------------------------
# shift expansions


Shift = tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class ShiftTerm:
    """weight * prod(factors) * f(angles shifted by ``shifts``)."""

    weight: float
    factors: tuple[Expression, ...] = ()
    shifts: Shift = ()


def _merge_shift(shifts: Shift, index: int, delta: float) -> Shift:
    d = dict(shifts)
    d[index] = d.get(index, 0.0) + delta
    return tuple(sorted((k, v) for k, v in d.items() if v != 0.0))


def _canonical(terms: list[ShiftTerm]) -> list[ShiftTerm]:
    merged: dict[tuple, float] = {}
    keep: dict[tuple, ShiftTerm] = {}
    for t in terms:
        factors = tuple(sorted(t.factors, key=to_sexpr))
        key = (tuple(to_sexpr(f) for f in factors), t.shifts)
        merged[key] = merged.get(key, 0.0) + t.weight
        keep.setdefault(key, ShiftTerm(0.0, factors, t.shifts))
    return [
        ShiftTerm(w, keep[k].factors, keep[k].shifts) for k, w in merged.items() if w != 0.0
    ]


def _is_zero(e: Expression) -> bool:
    return isinstance(e, Const) and e.value == 0.0


def check_differentiable(program: Program, name: str) -> None:
    if name in program.generator_names():
        raise UnsupportedDerivative(
            f"'{name}' appears inside an evolution generator; use finite differences"
        )


def derivative_terms(
    program: Program,
    name: str,
    values: Values,
    terms: list[ShiftTerm] | None = None,
    rules: ShiftRules | None = None,
) -> list[ShiftTerm]:
    """Differentiate a shift expansion once more with respect to ``name``.

    Starting from ``[ShiftTerm(1.0)]`` (the plain expectation) this gives the
    first derivative; applying it again gives second derivatives, since each
    shifted expectation is a trigonometric polynomial in the same gaps.
    """
    check_differentiable(program, name)
    rules = rules or ShiftRules(program)
    terms = [ShiftTerm(1.0)] if terms is None else terms
    occurrences = [
        (k, differentiate(program.angle_expression(k), name)) for k in program.occurrences(name)
    ]
    out: list[ShiftTerm] = []
    for t in terms:
        for i, fct in enumerate(t.factors):
            dfct = differentiate(fct, name)
            if not _is_zero(dfct):
                out.append(ShiftTerm(t.weight, t.factors[:i] + (dfct,) + t.factors[i + 1 :], t.shifts))
        for k, da in occurrences:
            if _is_zero(da):
                continue
            ctx = rules.context(k, values)
            for w, d in zip(ctx.weights, ctx.shifts):
                out.append(ShiftTerm(t.weight * w, t.factors + (da,), _merge_shift(t.shifts, k, d)))
                out.append(ShiftTerm(-t.weight * w, t.factors + (da,), _merge_shift(t.shifts, k, -d)))
    return _canonical(out)


def expansion_for(program: Program, names: Sequence[str], values: Values) -> list[ShiftTerm]:
    """Shift expansion of d^k f / d names[0] ... d names[k-1]."""
    rules = ShiftRules(program)
    terms = [ShiftTerm(1.0)]
    for name in names:
        terms = derivative_terms(program, name, values, terms, rules)
    return terms


def batch_size(values: Values, state: np.ndarray | None = None) -> int:
    sizes = {np.size(v) for v in values.values() if np.ndim(v) > 0}
    if state is not None and np.ndim(state) == 2:
        sizes.add(np.shape(state)[0])
    sizes.discard(1)
    if len(sizes) > 1:
        raise ValueError(f"inconsistent batch sizes {sorted(sizes)}")
    return sizes.pop() if sizes else 1


def tile_values(values: Values, batch: int, copies: int) -> dict:
    out = {}
    for k, v in values.items():
        if np.ndim(v) > 0 and np.size(v) == batch and batch > 1:
            out[k] = np.tile(np.asarray(v, dtype=float).ravel(), copies)
        elif np.ndim(v) > 0:
            out[k] = np.asarray(v, dtype=float).ravel()[0]
        else:
            out[k] = v
    return out


def tile_state(state: np.ndarray | None, n_qubits: int, batch: int, copies: int) -> np.ndarray | None:
    if state is None:
        return None
    psi = initial_state(n_qubits, state)
    if psi.shape[0] == 1:
        return psi
    return np.tile(psi, (copies, 1))


def stacked_shifts(configs: Sequence[Shift], batch: int) -> dict[int, np.ndarray]:
    """Per-occurrence shift arrays for configs stacked config-major."""
    idx = sorted({k for c in configs for k, _ in c})
    out = {}
    for k in idx:
        per = np.array([dict(c).get(k, 0.0) for c in configs])
        out[k] = np.repeat(per, batch)
    return out


def evaluate_expansion(
    program: Program,
    observable: Block,
    values: Values,
    terms: list[ShiftTerm],
    state: np.ndarray | None = None,
) -> np.ndarray:
    """Sum of the expansion terms, evaluated in one stacked simulator run."""
    b = batch_size(values, state)
    if not terms:
        return np.zeros(b)
    configs = sorted({t.shifts for t in terms})
    pos = {c: i for i, c in enumerate(configs)}
    big = tile_values(values, b, len(configs))
    psi = program.run(big, tile_state(state, program.n_qubits, b, len(configs)), stacked_shifts(configs, b))
    o_psi = apply_operator(observable, psi, big, program.n_qubits)
    f = np.real(np.sum(np.conj(psi) * o_psi, axis=-1))
    f = np.broadcast_to(f, (len(configs) * b,)).reshape(len(configs), b)
    total = np.zeros(b)
    for t in terms:
        coef = t.weight
        for fct in t.factors:
            coef = coef * np.asarray(evaluate(fct, values), dtype=float)
        total = total + coef * f[pos[t.shifts]]
    return total


# --------------------------------------------------------------------------
# engines


def _program(circuit: QuantumCircuit | Program) -> Program:
    return circuit if isinstance(circuit, Program) else compile_circuit(circuit)


def gpsr_gradient(
    circuit: QuantumCircuit | Program,
    observable: Block,
    values: Values,
    wrt: Sequence[str],
    state: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """First derivatives from shifted expectation values only."""
    prog = _program(circuit)
    check_observable(observable)
    rules = ShiftRules(prog)
    out = {}
    for name in wrt:
        terms = derivative_terms(prog, name, values, rules=rules)
        out[name] = evaluate_expansion(prog, observable, values, terms, state)
    return out


@dataclass
class AdjointResult:
    values: np.ndarray  # (batch,)
    jacobian: dict[str, np.ndarray]  # name -> (batch,)
    state_buffers: int = 0


def adjoint_jacobian(
    program: Program,
    observable: Block,
    values: Values,
    wrt: Sequence[str],
    state: np.ndarray | None = None,
    shifts: Mapping[int, float | np.ndarray] | None = None,
) -> AdjointResult:
    """Reverse sweep over a digital program.

    Holds two working states: the forward state, un-applied gate by gate,
    and the observable-projected state carried backwards with it.
    """
    for op in program.ops:
        if isinstance(op, EvoOp):
            raise AnalogBlockInAdjoint("adjoint differentiation supports digital gates only")
    n = program.n_qubits
    psi = program.run(values, state, shifts)
    lam = apply_operator(observable, psi, values, n)
    buffers = 2
    f = np.real(np.sum(np.conj(psi) * lam, axis=-1))
    b = psi.shape[0]

    wanted = set(wrt)
    chain_factors: dict[int, list[tuple[str, np.ndarray]]] = {}
    for op in program.ops:
        if not op.parametric:
            continue
        names = free_names(op.angle) & wanted
        facs = []
        for name in names:
            d = differentiate(op.angle, name)
            if not _is_zero(d):
                facs.append((name, np.asarray(evaluate(d, values), dtype=float)))
        if facs:
            chain_factors[op.index] = facs

    grads = {name: np.zeros(b) for name in wrt}
    for op in reversed(program.ops):
        u = program.op_matrix(op, values, shifts)
        ud = np.conj(np.swapaxes(u, -1, -2))
        psi = apply_matrix(psi, ud, op.qubits, n)
        if op.index in chain_factors:
            du = -0.5j * np.matmul(GENERATORS[op.kind][None], u)
            mu = apply_matrix(psi, du, op.qubits, n)
            dtheta = 2.0 * np.real(np.sum(np.conj(lam) * mu, axis=-1))
            for name, fac in chain_factors[op.index]:
                grads[name] = grads[name] + dtheta * fac
        lam = apply_matrix(lam, ud, op.qubits, n)
    return AdjointResult(f, grads, buffers)


def adjoint_gradient(
    circuit: QuantumCircuit | Program,
    observable: Block,
    values: Values,
    wrt: Sequence[str],
    state: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    prog = _program(circuit)
    check_observable(observable)
    return adjoint_jacobian(prog, observable, values, wrt, state).jacobian


def finite_diff_gradient(
    circuit: QuantumCircuit | Program,
    observable: Block,
    values: Values,
    wrt: Sequence[str],
    h: float = 1e-4,
    state: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """Central differences (f(x+h) - f(x-h)) / 2h per parameter."""
    prog = _program(circuit)
    out = {}
    for name in wrt:
        plus, minus = dict(values), dict(values)
        v = np.asarray(values[name], dtype=float)
        plus[name], minus[name] = v + h, v - h
        fp = _expect(prog, observable, plus, state)
        fm = _expect(prog, observable, minus, state)
        out[name] = (fp - fm) / (2.0 * h)
    return out


def _expect(prog: Program, observable: Block, values: Values, state=None) -> np.ndarray:
    psi = prog.run(values, state)
    o_psi = apply_operator(observable, psi, values, prog.n_qubits)
    return np.real(np.sum(np.conj(psi) * o_psi, axis=-1))


def central_difference(f, x: float, h: float = 1e-4) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


# --------------------------------------------------------------------------
# request / dispatch


@dataclass
class GradientRequest:
    circuit: QuantumCircuit | Program
    observable: Block | Sequence[Block]
    values: Values
    wrt: Sequence[str]
    mode: DiffMode = DiffMode.GPSR
    state: np.ndarray | None = None
    fd_step: float = 1e-4


@dataclass
class GradientResult:
    mode: DiffMode
    gradients: dict[str, np.ndarray] = field(default_factory=dict)  # name -> (batch, n_obs)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.gradients[name]


ENGINES = {
    DiffMode.GPSR: gpsr_gradient,
    DiffMode.ADJOINT: adjoint_gradient,
}


def compute_gradient(req: GradientRequest) -> GradientResult:
    prog = _program(req.circuit)
    mode = DiffMode(req.mode)
    params = {p.name for p in (req.circuit.parameters() if isinstance(req.circuit, QuantumCircuit) else [])}
    if params and not set(req.wrt) <= params:
        raise KeyError(f"not circuit parameters: {sorted(set(req.wrt) - params)}")
    obs = [req.observable] if isinstance(req.observable, Block) else list(req.observable)
    cols: dict[str, list[np.ndarray]] = {name: [] for name in req.wrt}
    b = batch_size(req.values, req.state)
    for o in obs:
        if mode is DiffMode.FD:
            g = finite_diff_gradient(prog, o, req.values, req.wrt, req.fd_step, req.state)
        else:
            g = ENGINES[mode](prog, o, req.values, req.wrt, req.state)
        for name in req.wrt:
            cols[name].append(np.broadcast_to(g[name], (b,)))
    return GradientResult(mode, {k: np.stack(v, axis=-1) for k, v in cols.items()})
