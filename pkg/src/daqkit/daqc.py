"""Digital-analog layer.

Analog operations are global pulses on a Rydberg register. They are lowered to
Hamiltonian evolutions with the van der Waals interaction always on. The
sDAQC transform maps the evolution of an Ising target Hamiltonian onto
X-conjugated evolutions of a fixed Ising build Hamiltonian plus single-qubit
Z rotations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Mapping

import numpy as np
from scipy.optimize import linprog

from daqkit.blocks import (
    AddBlock,
    Block,
    ChainBlock,
    GateKind,
    HamEvo,
    KronBlock,
    PrimitiveBlock,
    ScaleBlock,
    H,
    I,
    N,
    RZ,
    X,
    add,
    chain,
    hamevo,
    kron,
    scale,
)
from daqkit.constructors import build_qft
from daqkit.errors import NonIsingGenerator, SingularTransform, UnsupportedStrategy
from daqkit.hamiltonian import RydbergParams, hamiltonian_factory, rydberg_hamiltonian
from daqkit.register import Register
from daqkit.symexpr import Const, Expression, Neg, as_expression, evaluate

MAX_TRANSFORM_CONDITION = 1e12


class Strategy(str, Enum):
    DIGITAL = "digital"
    SDAQC = "sdaqc"
    BDAQC = "bdaqc"


class AnalogKind(str, Enum):
    RX = "AnalogRX"
    RY = "AnalogRY"
    RZ = "AnalogRZ"
    ROT = "AnalogRot"
    INTERACTION = "AnalogInteraction"


@dataclass(frozen=True)
class AnalogOp(Block):
    """A global pulse; its qubit support is the whole register once lowered."""

    kind: AnalogKind
    angle: Expression | None = None
    omega: Expression | None = None
    delta: Expression | None = None
    phase: Expression | None = None
    duration: Expression | None = None
    device: RydbergParams | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        rot = self.kind in (AnalogKind.RX, AnalogKind.RY, AnalogKind.RZ)
        has = {k: getattr(self, k) is not None for k in ("angle", "omega", "delta", "phase", "duration")}
        if rot and (not has["angle"] or any(has[k] for k in ("omega", "delta", "phase", "duration"))):
            raise ValueError(f"{self.kind.value} takes exactly an angle")
        if self.kind is AnalogKind.ROT and (has["angle"] or not all(has[k] for k in ("omega", "delta", "phase", "duration"))):
            raise ValueError("AnalogRot takes omega, delta, phase and duration")
        if self.kind is AnalogKind.INTERACTION and (not has["duration"] or sum(has.values()) != 1):
            raise ValueError("AnalogInteraction takes only a duration")

    @property
    def qubit_support(self) -> tuple[int, ...]:
        return ()

    def expressions(self) -> Iterator[Expression]:
        for k in ("angle", "omega", "delta", "phase", "duration"):
            e = getattr(self, k)
            if e is not None:
                yield e

    def dagger(self) -> Block:
        if self.angle is not None:
            return replace(self, angle=Neg(self.angle))
        return replace(self, duration=Neg(self.duration))

    def lower(self, register: Register) -> Block:
        return lower_analog(self, register, self.device)


def _opt(x: object) -> Expression:
    return as_expression(x)


def AnalogRX(angle: object, device: RydbergParams | None = None) -> AnalogOp:
    return AnalogOp(AnalogKind.RX, angle=_opt(angle), device=device)


def AnalogRY(angle: object, device: RydbergParams | None = None) -> AnalogOp:
    return AnalogOp(AnalogKind.RY, angle=_opt(angle), device=device)


def AnalogRZ(angle: object, device: RydbergParams | None = None) -> AnalogOp:
    return AnalogOp(AnalogKind.RZ, angle=_opt(angle), device=device)


def AnalogInteraction(duration: object, device: RydbergParams | None = None) -> AnalogOp:
    return AnalogOp(AnalogKind.INTERACTION, duration=_opt(duration), device=device)


def AnalogRot(omega: object, phase: object, delta: object, duration: object, device: RydbergParams | None = None) -> AnalogOp:
    return AnalogOp(
        AnalogKind.ROT,
        omega=_opt(omega),
        phase=_opt(phase),
        delta=_opt(delta),
        duration=_opt(duration),
        device=device,
    )


def _over(angle: Expression, rate: Expression) -> Expression:
    if isinstance(rate, Const):
        if rate.value == 0.0:
            raise ValueError("pulse amplitude must be non-zero to realise a rotation")
        return angle * Const(1.0 / rate.value)
    return angle / rate


def lower_analog(
    op: AnalogOp,
    register: Register,
    params: RydbergParams | None = None,
    strategy: Strategy | str = Strategy.BDAQC,
) -> HamEvo:
    """Rydberg evolution realising ``op``; the C6/r^6 term is always present.

    AnalogRX(a): phi = 0, delta = 0, duration = a / omega.
    AnalogRY(a): phi = -pi/2 so the drive is +(omega/2) sum Y, duration = a / omega.
    AnalogRZ(a): omega = 0, duration = a / delta, which gives RZ(a) per qubit
    up to a global phase since -delta n = delta (Z - 1) / 2.
    """
    if Strategy(strategy) is not Strategy.BDAQC:
        raise UnsupportedStrategy("analog operations are lowered with always-on interactions only")
    p = params or RydbergParams()
    zero = Const(0.0)
    if op.kind is AnalogKind.RX:
        pp = replace(p, delta=zero, phi=zero)
        t = _over(op.angle, p.omega)
    elif op.kind is AnalogKind.RY:
        pp = replace(p, delta=zero, phi=Const(-np.pi / 2))
        t = _over(op.angle, p.omega)
    elif op.kind is AnalogKind.RZ:
        pp = replace(p, omega=zero, phi=zero)
        t = _over(op.angle, p.delta)
    elif op.kind is AnalogKind.INTERACTION:
        pp = replace(p, omega=zero, delta=zero, phi=zero)
        t = op.duration
    else:
        pp = replace(p, omega=op.omega, delta=op.delta, phi=op.phase)
        t = op.duration
    return HamEvo(rydberg_hamiltonian(register, pp), t, tag=op.kind.value)


# --------------------------------------------------------------------------
# Ising polynomials

ZPoly = dict[frozenset, float]


def _poly_mul(a: ZPoly, b: ZPoly) -> ZPoly:
    out: ZPoly = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka ^ kb  # Z_i Z_i = 1
            out[k] = out.get(k, 0.0) + va * vb
    return out


def _poly_add(a: ZPoly, b: ZPoly) -> ZPoly:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + v
    return out


def ising_terms(block: Block, values: Mapping[str, float] | None = None) -> ZPoly:
    """Expand a Z/N/I block into {set of qubits: coefficient of prod Z}."""
    values = values or {}
    if isinstance(block, PrimitiveBlock):
        q = block.support[0]
        if block.gate is GateKind.Z:
            return {frozenset({q}): 1.0}
        if block.gate is GateKind.N:
            return {frozenset(): 0.5, frozenset({q}): -0.5}
        if block.gate is GateKind.I:
            return {frozenset(): 1.0}
        raise NonIsingGenerator(f"{block.gate.value} is not diagonal in the Z basis")
    if isinstance(block, AddBlock):
        out: ZPoly = {}
        for b in block.blocks:
            out = _poly_add(out, ising_terms(b, values))
        return out
    if isinstance(block, ScaleBlock):
        c = evaluate(block.coeff, values)
        if np.ndim(c) != 0:
            raise NonIsingGenerator("generator coefficients must be scalars here")
        return {k: float(c) * v for k, v in ising_terms(block.block, values).items()}
    if isinstance(block, (KronBlock, ChainBlock)):
        out = {frozenset(): 1.0}
        for b in block.blocks:
            out = _poly_mul(out, ising_terms(b, values))
        return out
    raise NonIsingGenerator(f"{type(block).__name__} is not an Ising term")


def _clean(poly: ZPoly, tol: float = 1e-14) -> ZPoly:
    scale_ = max([abs(v) for v in poly.values()] + [1.0])
    return {k: v for k, v in poly.items() if abs(v) > tol * scale_}


def _flat_terms(block: Block, coeff: Expression = Const(1.0)) -> Iterator[tuple[Expression, Block]]:
    if isinstance(block, AddBlock):
        for b in block.blocks:
            yield from _flat_terms(b, coeff)
    elif isinstance(block, ScaleBlock):
        yield from _flat_terms(block.block, coeff * block.coeff if coeff != Const(1.0) else block.coeff)
    else:
        yield coeff, block


def interaction_part(gen_build: Block) -> Block:
    """Two-body terms of a build Hamiltonian; one-body detuning terms are dropped.

    Under sDAQC the global drive and detuning are switched off while the
    interaction evolves, so only the pair terms are kept.
    """
    kept = []
    for coeff, term in _flat_terms(gen_build):
        k = len(term.qubit_support)
        if k > 2:
            raise NonIsingGenerator("build Hamiltonian terms must act on at most two qubits")
        if k == 2:
            kept.append(term if coeff == Const(1.0) else scale(coeff, term))
    if not kept:
        raise SingularTransform("build Hamiltonian has no two-body interaction")
    return add(kept)


# --------------------------------------------------------------------------
# sDAQC transform


@dataclass
class DaqcTransformRequest:
    n_qubits: int
    gen_target: Block
    t_f: float
    gen_build: Block
    strategy: Strategy = Strategy.SDAQC


@dataclass
class DaqcSolution:
    block: Block
    flips: list[tuple[int, ...]]  # X-conjugated qubits per evolution slice
    times: list[float]
    local_angles: dict[int, float]  # RZ angle per qubit
    global_phase: float  # evolution "time" of the identity, exp(-i phase)
    build: Block

    @property
    def total_time(self) -> float:
        return float(sum(abs(t) for t in self.times))


def _conjugation_sets(n: int) -> list[tuple[int, ...]]:
    """X-flip sets up to size 2, one representative per complement class."""
    seen: set[frozenset] = set()
    out = []
    for size in range(0, 3):
        for s in itertools.combinations(range(n), size):
            fs = frozenset(s)
            comp = frozenset(range(n)) - fs
            if fs in seen or comp in seen:
                continue
            seen.add(fs)
            out.append(s)
    return out


def _solve_times(a: np.ndarray, b: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Minimum total |time| solution of a t = b, refined exactly on its support."""
    k = a.shape[1]
    if a.shape[0] == 0 or not np.any(b):
        return np.zeros(k)
    res = linprog(
        np.concatenate([cost, cost]),
        A_eq=np.hstack([a, -a]),
        b_eq=b,
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise SingularTransform(f"no build evolution reproduces the target ({res.message})")
    t = res.x[:k] - res.x[k:]
    support = np.flatnonzero(np.abs(t) > 1e-9 * max(1.0, np.max(np.abs(t))))
    sub = a[:, support]
    if np.linalg.cond(sub) > MAX_TRANSFORM_CONDITION:
        raise SingularTransform("transform system is ill-conditioned")
    exact, *_ = np.linalg.lstsq(sub, b, rcond=None)
    if np.max(np.abs(sub @ exact - b)) > 1e-10 * max(1.0, np.max(np.abs(b))):
        raise SingularTransform("transform system has no exact solution")
    out = np.zeros(k)
    out[support] = exact
    return out


def solve_daqc(
    n_qubits: int,
    gen_target: Block,
    t_f: float,
    gen_build: Block,
    strategy: Strategy | str = Strategy.SDAQC,
    values: Mapping[str, float] | None = None,
    keep_global_phase: bool = True,
) -> DaqcSolution:
    """sDAQC mapping of exp(-i t_f H_target) onto build evolutions.

    Both Hamiltonians are expanded in products of Z. Conjugating the build by
    X on a set S multiplies each Z_i Z_j coefficient by chi_i chi_j with
    chi = -1 on S, so the slice times solve the sign system
    sum_k t_k chi_i^k chi_j^k = t_f g_ij / h_ij over the coupled pairs. The
    solution with the least total evolution time is used. Remaining
    single-qubit Z terms become RZ gates and the constant becomes a global
    phase.
    """
    if Strategy(strategy) is not Strategy.SDAQC:
        raise UnsupportedStrategy("only the sDAQC strategy is implemented")
    target = _clean(ising_terms(gen_target, values))
    build = interaction_part(gen_build)
    hpoly = _clean(ising_terms(build, values))
    for poly, what in ((target, "target"), (hpoly, "build")):
        if any(len(k) > 2 for k in poly):
            raise NonIsingGenerator(f"{what} has terms beyond two-body")
        if any(q >= n_qubits for k in poly for q in k):
            raise ValueError(f"{what} acts outside {n_qubits} qubits")

    pairs = list(itertools.combinations(range(n_qubits), 2))
    rows, rhs = [], []
    for i, j in pairs:
        g = target.get(frozenset({i, j}), 0.0)
        h = hpoly.get(frozenset({i, j}), 0.0)
        if h == 0.0:
            if g != 0.0:
                raise SingularTransform(f"build has no coupling on pair ({i}, {j})")
            continue
        rows.append((i, j))
        rhs.append(t_f * g / h)
    flips = _conjugation_sets(n_qubits)
    chi = np.ones((len(flips), n_qubits))
    for k, s in enumerate(flips):
        chi[k, list(s)] = -1.0
    a = np.array([[chi[k, i] * chi[k, j] for k in range(len(flips))] for i, j in rows]).reshape(len(rows), len(flips))
    # prefer fewer X gates on ties
    cost = np.array([1.0 + 1e-6 * len(s) for s in flips])
    times = _solve_times(a, np.asarray(rhs, dtype=float), cost)

    blocks: list[Block] = []
    used_flips, used_times = [], []
    accumulated = np.zeros(n_qubits)
    const = 0.0
    singles = np.array([hpoly.get(frozenset({q}), 0.0) for q in range(n_qubits)])
    for k, t in enumerate(times):
        if t == 0.0:
            continue
        s = flips[k]
        commutes = all(len(key & set(s)) % 2 == 0 for key in hpoly)
        xs = [] if commutes or not s else [X(q) for q in s]
        blocks += xs + [hamevo(build, t)] + xs
        used_flips.append(s if xs else ())
        used_times.append(float(t))
        accumulated += t * singles * (chi[k] if xs else 1.0)
        const += t * hpoly.get(frozenset(), 0.0)

    local: dict[int, float] = {}
    for q in range(n_qubits):
        c = t_f * target.get(frozenset({q}), 0.0) - accumulated[q]
        if abs(c) > 1e-14:
            local[q] = 2.0 * c
            blocks.append(RZ(q, 2.0 * c))
    phase = t_f * target.get(frozenset(), 0.0) - const
    if keep_global_phase and abs(phase) > 1e-14:
        blocks.append(hamevo(I(0), phase))
    return DaqcSolution(chain(blocks).tagged("sDAQC"), used_flips, used_times, local, phase, build)


def daqc_transform(
    n_qubits: int | DaqcTransformRequest,
    gen_target: Block | None = None,
    t_f: float = 1.0,
    gen_build: Block | None = None,
    strategy: Strategy | str = Strategy.SDAQC,
    values: Mapping[str, float] | None = None,
    keep_global_phase: bool = True,
) -> Block:
    """Circuit evolving ``gen_target`` for ``t_f`` using only ``gen_build``.

    Accepts either the individual fields or a DaqcTransformRequest.
    """
    if isinstance(n_qubits, DaqcTransformRequest):
        req = n_qubits
        n_qubits, gen_target, t_f, gen_build, strategy = (
            req.n_qubits, req.gen_target, req.t_f, req.gen_build, req.strategy,
        )
    if gen_target is None or gen_build is None:
        raise TypeError("daqc_transform needs gen_target and gen_build")
    return solve_daqc(n_qubits, gen_target, t_f, gen_build, strategy, values, keep_global_phase).block


def complete_graph_zz(n_qubits: int) -> Block:
    return hamiltonian_factory(Register.line(n_qubits), interaction="ZZ", use_all_node_pairs=True)


def build_da_qft(
    n_qubits: int,
    strategy: Strategy | str = Strategy.DIGITAL,
    gen_build: Block | None = None,
) -> Block:
    """QFT whose CPHASE layers are optionally realised by sDAQC transforms.

    Layer ``l`` applies CPHASE(j, l, pi/2**(j-l)) for j > l, which equals
    exp(-i H) with H = -sum_j (pi/2**(j-l)) n_l n_j.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.DIGITAL:
        return build_qft(list(range(n_qubits)))
    if strategy is not Strategy.SDAQC:
        raise UnsupportedStrategy(f"{strategy.value} QFT is not implemented")
    if n_qubits == 1:
        return chain(build_qft([0])).tagged("DA-QFT")
    build = gen_build if gen_build is not None else complete_graph_zz(n_qubits)
    layers: list[Block] = []
    for l in range(n_qubits):
        layers.append(H(l))
        terms = [
            scale(-np.pi / 2 ** (j - l), kron(N(l), N(j))) for j in range(l + 1, n_qubits)
        ]
        if terms:
            layers.append(daqc_transform(n_qubits, add(terms), 1.0, build))
    return chain(layers).tagged("DA-QFT")
