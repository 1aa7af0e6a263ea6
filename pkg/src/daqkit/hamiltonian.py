"""Hamiltonian construction: generic factory, Rydberg model, observables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from daqkit.blocks import Block, GateKind, N, X, Y, Z, add, kron, primitive, scale
from daqkit.errors import (
    CoincidentAtoms,
    NonHermitianCoefficient,
    StrengthLengthMismatch,
)
from daqkit.register import Register
from daqkit.symexpr import Const, Expression, as_expression, cos, sin

# rad * um^6 / us for Rydberg level 70; configurable through RydbergParams
C6_DEFAULT = 5420158.53

# pulse amplitudes used when analog rotations are lowered (rad/us)
DEFAULT_OMEGA = math.pi
DEFAULT_DELTA = math.pi


class Interaction(str, Enum):
    NN = "NN"
    ZZ = "ZZ"
    XY = "XY"
    XYZ = "XYZ"


Strength = Union[float, str, Expression]
InteractionFn = Callable[[int, int], Block]


def interaction_term(kind: Interaction | str, i: int, j: int) -> Block:
    kind = Interaction(kind)
    if kind is Interaction.NN:
        return kron(N(i), N(j))
    if kind is Interaction.ZZ:
        return kron(Z(i), Z(j))
    xy = add(kron(X(i), X(j)), kron(Y(i), Y(j)))
    if kind is Interaction.XY:
        return xy
    return add(kron(X(i), X(j)), kron(Y(i), Y(j)), kron(Z(i), Z(j)))


def _coeff(value: Strength) -> Expression:
    if isinstance(value, complex) or (isinstance(value, np.generic) and np.iscomplexobj(value)):
        if value.imag != 0:
            raise NonHermitianCoefficient(f"coefficient {value} is not real")
        value = value.real
    return as_expression(value)


def _strengths(spec, count: int, what: str) -> list[Expression]:
    if spec is None:
        return [Const(1.0)] * count
    if isinstance(spec, (str, Expression)) or np.isscalar(spec):
        return [_coeff(spec)] * count
    items = list(spec)
    if len(items) != count:
        raise StrengthLengthMismatch(f"expected {count} {what} strengths, got {len(items)}")
    return [_coeff(v) for v in items]


def _gate_kind(op) -> GateKind:
    if isinstance(op, (GateKind, str)):
        kind = GateKind(op)
    else:  # a constructor such as X
        kind = op(0).gate
    if kind not in (GateKind.X, GateKind.Y, GateKind.Z, GateKind.N):
        raise ValueError(f"detuning operator must be X, Y, Z or N, not {kind.value}")
    return kind


def _is_zero(e: Expression) -> bool:
    return isinstance(e, Const) and e.value == 0.0


def hamiltonian_factory(
    register: Register | int,
    interaction: Interaction | str | InteractionFn | None = None,
    interaction_strength: Strength | Sequence[Strength] | None = None,
    detuning: GateKind | str | Callable | None = None,
    detuning_strength: Strength | Sequence[Strength] | None = None,
    use_all_node_pairs: bool = False,
) -> Block:
    """Sum of detuning terms alpha_i O_i and pair terms beta_ij H_ij.

    Pairs are the register edges, or every i < j pair with
    ``use_all_node_pairs``; per-pair strengths follow that order.
    ``interaction`` may be a callable ``(i, j) -> Block``.
    """
    reg = Register.line(register) if isinstance(register, int) else register
    terms: list[Block] = []
    if detuning is not None:
        kind = _gate_kind(detuning)
        alphas = _strengths(detuning_strength, reg.n_qubits, "detuning")
        for q, a in enumerate(alphas):
            if not _is_zero(a):
                terms.append(scale(a, primitive(kind, (q,))))
    if interaction is not None:
        pairs = reg.all_node_pairs if use_all_node_pairs else list(reg.edges)
        betas = _strengths(interaction_strength, len(pairs), "interaction")
        make = interaction if callable(interaction) else (lambda i, j: interaction_term(interaction, i, j))
        for (i, j), b in zip(pairs, betas):
            if not _is_zero(b):
                terms.append(scale(b, make(i, j)))
    if not terms:
        raise ValueError("the Hamiltonian has no terms")
    return add(terms)


@dataclass(frozen=True)
class RydbergParams:
    """Global pulse parameters: omega and delta in rad/us, phi in rad, duration in us."""

    omega: Expression = field(default_factory=lambda: Const(DEFAULT_OMEGA))
    delta: Expression = field(default_factory=lambda: Const(DEFAULT_DELTA))
    phi: Expression = field(default_factory=lambda: Const(0.0))
    c6: float = C6_DEFAULT
    duration: Expression = field(default_factory=lambda: Const(1.0))

    def __post_init__(self) -> None:
        for name in ("omega", "delta", "phi", "duration"):
            object.__setattr__(self, name, as_expression(getattr(self, name)))
        if not self.c6 > 0:
            raise ValueError("C6 must be positive")


def _const_fold(e: Expression) -> Expression:
    if e.is_constant:
        return Const(float(e.evaluate({})))
    return e


def interaction_coefficients(reg: Register, c6: float) -> dict[tuple[int, int], float]:
    out = {}
    for pair, r in reg.distances.items():
        if r <= 0.0:
            raise CoincidentAtoms(f"atoms {pair} share a position")
        out[pair] = c6 / r**6
    return out


def rydberg_hamiltonian(reg: Register, p: RydbergParams | None = None, c6: float | None = None) -> Block:
    """Global drive, detuning and C6/r^6 van der Waals interaction over all pairs.

    sum_i (omega/2)(cos(phi) X_i - sin(phi) Y_i) - delta n_i
      + sum_{i<j} C6/r_ij^6 n_i n_j
    Terms whose coefficient folds to zero are dropped.
    """
    p = p or RydbergParams()
    c6 = p.c6 if c6 is None else c6
    x_coeff = _const_fold(p.omega * 0.5 * cos(p.phi))
    y_coeff = _const_fold(-(p.omega * 0.5 * sin(p.phi)))
    n_coeff = _const_fold(-p.delta)
    terms: list[Block] = []
    for q in range(reg.n_qubits):
        if not _is_zero(x_coeff):
            terms.append(scale(x_coeff, X(q)))
        if not _is_zero(y_coeff):
            terms.append(scale(y_coeff, Y(q)))
        if not _is_zero(n_coeff):
            terms.append(scale(n_coeff, N(q)))
    if reg.n_qubits > 1:
        for (i, j), v in interaction_coefficients(reg, c6).items():
            if v != 0.0:
                terms.append(scale(v, kron(N(i), N(j))))
    if not terms:
        # fully switched off: identity generator keeps the support explicit
        terms = [scale(0.0, primitive(GateKind.I, (q,))) for q in range(reg.n_qubits)]
    return add(terms)


def total_magnetization(n_qubits: int) -> Block:
    return add(Z(i) for i in range(n_qubits))


def ising_hamiltonian(n_qubits: int, field_strength: float = 1.0, coupling: float = 1.0) -> Block:
    """Transverse field sum_i X_i plus complete-graph sum_{i<j} Z_i Z_j."""
    terms: list[Block] = [scale(field_strength, X(i)) if field_strength != 1.0 else X(i) for i in range(n_qubits)]
    for i in range(n_qubits):
        for j in range(i + 1, n_qubits):
            zz = kron(Z(i), Z(j))
            terms.append(zz if coupling == 1.0 else scale(coupling, zz))
    return add(terms)


def observables(kind: str, n_qubits: int, **kwargs) -> Block:
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if kind == "total_magnetization":
        return total_magnetization(n_qubits)
    if kind == "ising":
        return ising_hamiltonian(n_qubits, **kwargs)
    raise ValueError(f"unknown observable {kind!r}")
