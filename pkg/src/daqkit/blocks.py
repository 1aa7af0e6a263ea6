"""Block IR: primitive gates, Hamiltonian evolution and composite blocks.

Program order: ``chain(A, B)`` applies ``A`` first, so its matrix is ``M_B @ M_A``.
Bit order: qubit 0 is the leftmost bitstring character and the most
significant bit of a basis-state index.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from numbers import Real
from typing import Iterable, Iterator

import numpy as np

from daqkit.errors import (
    DuplicateQubit,
    EmptyComposition,
    InvalidGate,
    OverlappingSupport,
    ParameterConflict,
)
from daqkit.symexpr import Expression, Neg, Parameter, as_expression, collect_parameters, to_sexpr


class GateKind(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"
    H = "H"
    N = "N"
    I = "I"  # noqa: E741
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CPHASE = "CPHASE"
    CNOT = "CNOT"
    CZ = "CZ"


PARAMETRIC = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.CPHASE})
TWO_QUBIT = frozenset({GateKind.CPHASE, GateKind.CNOT, GateKind.CZ})
HERMITIAN = frozenset(GateKind) - PARAMETRIC


@dataclass(frozen=True)
class Block:
    tag: str | None = field(default=None, kw_only=True, compare=False)

    @property
    def qubit_support(self) -> tuple[int, ...]:
        raise NotImplementedError

    @property
    def n_qubits(self) -> int:
        s = self.qubit_support
        return max(s) + 1 if s else 0

    def children(self) -> tuple[Block, ...]:
        return ()

    def expressions(self) -> Iterator[Expression]:
        """Expressions held directly by this node (not its children)."""
        return iter(())

    def parameters(self) -> frozenset[Parameter]:
        """All parameters in the block tree; names must be unambiguous."""
        found: dict[str, Parameter] = {}
        for b in self.walk():
            for e in b.expressions():
                for p in collect_parameters(e):
                    prev = found.setdefault(p.name, p)
                    if prev != p:
                        raise ParameterConflict(f"parameter '{p.name}' defined twice")
        return frozenset(found.values())

    def walk(self) -> Iterator[Block]:
        yield self
        for c in self.children():
            yield from c.walk()

    def dagger(self) -> Block:
        raise NotImplementedError

    def tagged(self, tag: str) -> Block:
        return replace(self, tag=tag)

    # operator sugar mirroring chain/kron/add
    def __mul__(self, other: object) -> Block:
        if isinstance(other, Block):
            return chain(self, other)
        return ScaleBlock(as_expression(other), self)

    def __rmul__(self, other: object) -> Block:
        return ScaleBlock(as_expression(other), self)

    def __matmul__(self, other: Block) -> Block:
        return kron(self, other)

    def __add__(self, other: Block) -> Block:
        return add(self, other)

    def __sub__(self, other: Block) -> Block:
        return add(self, ScaleBlock(as_expression(-1.0), other))

    def __neg__(self) -> Block:
        return ScaleBlock(as_expression(-1.0), self)

    def __str__(self) -> str:
        return render_tree(self)


@dataclass(frozen=True)
class PrimitiveBlock(Block):
    gate: GateKind
    support: tuple[int, ...]
    angle: Expression | None = None

    def __post_init__(self) -> None:
        arity = 2 if self.gate in TWO_QUBIT else 1
        if len(self.support) != arity:
            raise InvalidGate(f"{self.gate.value} acts on {arity} qubit(s), got {self.support}")
        if len(set(self.support)) != len(self.support):
            raise DuplicateQubit(f"{self.gate.value} support {self.support} repeats a qubit")
        if any(q < 0 for q in self.support):
            raise InvalidGate("qubit indices must be non-negative")
        if (self.gate in PARAMETRIC) != (self.angle is not None):
            raise InvalidGate(
                f"{self.gate.value} {'requires' if self.gate in PARAMETRIC else 'forbids'} an angle"
            )

    @property
    def qubit_support(self) -> tuple[int, ...]:
        return tuple(sorted(self.support))

    def expressions(self) -> Iterator[Expression]:
        if self.angle is not None:
            yield self.angle

    def dagger(self) -> Block:
        if self.angle is None:
            return self
        return replace(self, angle=Neg(self.angle))


@dataclass(frozen=True)
class HamEvo(Block):
    """exp(-i * time * generator) for a Hermitian generator block."""

    generator: Block
    time: Expression

    @property
    def qubit_support(self) -> tuple[int, ...]:
        return self.generator.qubit_support

    def children(self) -> tuple[Block, ...]:
        return (self.generator,)

    def expressions(self) -> Iterator[Expression]:
        yield self.time

    def dagger(self) -> Block:
        return replace(self, time=Neg(self.time))


@dataclass(frozen=True)
class CompositeBlock(Block):
    blocks: tuple[Block, ...]

    @property
    def qubit_support(self) -> tuple[int, ...]:
        qs: set[int] = set()
        for b in self.blocks:
            qs.update(b.qubit_support)
        return tuple(sorted(qs))

    def children(self) -> tuple[Block, ...]:
        return self.blocks


@dataclass(frozen=True)
class ChainBlock(CompositeBlock):
    def dagger(self) -> Block:
        return replace(self, blocks=tuple(b.dagger() for b in reversed(self.blocks)))


@dataclass(frozen=True)
class KronBlock(CompositeBlock):
    def __post_init__(self) -> None:
        seen: set[int] = set()
        for b in self.blocks:
            s = set(b.qubit_support)
            if s & seen:
                raise OverlappingSupport(f"kron children overlap on qubits {sorted(s & seen)}")
            seen |= s

    def dagger(self) -> Block:
        return replace(self, blocks=tuple(b.dagger() for b in self.blocks))


@dataclass(frozen=True)
class AddBlock(CompositeBlock):
    def dagger(self) -> Block:
        return replace(self, blocks=tuple(b.dagger() for b in self.blocks))


@dataclass(frozen=True)
class ScaleBlock(Block):
    coeff: Expression
    block: Block

    @property
    def qubit_support(self) -> tuple[int, ...]:
        return self.block.qubit_support

    def children(self) -> tuple[Block, ...]:
        return (self.block,)

    def expressions(self) -> Iterator[Expression]:
        yield self.coeff

    def dagger(self) -> Block:
        # coefficients are real expressions
        return replace(self, block=self.block.dagger())


# --------------------------------------------------------------------------
# composition


def _flatten_args(blocks: tuple) -> list[Block]:
    if len(blocks) == 1 and not isinstance(blocks[0], Block):
        blocks = tuple(blocks[0])
    out = list(blocks)
    for b in out:
        if not isinstance(b, Block):
            raise TypeError(f"expected a Block, got {type(b).__name__}")
    return out


def chain(*blocks: Block | Iterable[Block]) -> ChainBlock:
    """Sequential composition; the first block is applied first.

    An empty chain is the identity on no qubits.
    """
    return ChainBlock(tuple(_flatten_args(blocks)))


def kron(*blocks: Block | Iterable[Block]) -> KronBlock:
    bs = _flatten_args(blocks)
    if not bs:
        raise EmptyComposition("kron needs at least one block")
    return KronBlock(tuple(bs))


def add(*blocks: Block | Iterable[Block]) -> AddBlock:
    bs = _flatten_args(blocks)
    if not bs:
        raise EmptyComposition("add needs at least one block")
    return AddBlock(tuple(bs))


def compose(kind: str, blocks: Iterable[Block]) -> Block:
    ops = {"chain": chain, "kron": kron, "add": add}
    if kind not in ops:
        raise ValueError(f"unknown composition {kind!r}")
    return ops[kind](list(blocks))


def dagger(block: Block) -> Block:
    return block.dagger()


def qubit_support(block: Block) -> list[int]:
    return list(block.qubit_support)


def tag(block: Block, name: str) -> Block:
    return block.tagged(name)


# --------------------------------------------------------------------------
# primitive constructors


def _angle(value: object) -> Expression:
    return as_expression(value)


def X(q: int) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.X, (q,))


def Y(q: int) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.Y, (q,))


def Z(q: int) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.Z, (q,))


def H(q: int) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.H, (q,))


def N(q: int) -> PrimitiveBlock:
    """Number operator (1 - Z) / 2."""
    return PrimitiveBlock(GateKind.N, (q,))


def I(q: int) -> PrimitiveBlock:  # noqa: E743
    return PrimitiveBlock(GateKind.I, (q,))


def RX(q: int, angle: object) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.RX, (q,), _angle(angle))


def RY(q: int, angle: object) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.RY, (q,), _angle(angle))


def RZ(q: int, angle: object) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.RZ, (q,), _angle(angle))


def CPHASE(control: int, target: int, angle: object) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.CPHASE, (control, target), _angle(angle))


def CNOT(control: int, target: int) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.CNOT, (control, target))


def CZ(control: int, target: int) -> PrimitiveBlock:
    return PrimitiveBlock(GateKind.CZ, (control, target))


def primitive(kind: GateKind | str, support: Iterable[int], angle: object = None) -> PrimitiveBlock:
    return PrimitiveBlock(
        GateKind(kind), tuple(support), None if angle is None else _angle(angle)
    )


def hamevo(generator: Block, time: object) -> HamEvo:
    return HamEvo(generator, as_expression(time))


def scale(coeff: object, block: Block) -> ScaleBlock:
    if isinstance(coeff, complex) or np.iscomplexobj(coeff):
        raise TypeError("block coefficients must be real")
    return ScaleBlock(as_expression(coeff), block)


# --------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class QuantumCircuit:
    register: object  # daqkit.register.Register; kept loose to avoid an import cycle
    block: Block

    def __post_init__(self) -> None:
        from daqkit.register import Register

        reg = self.register
        if isinstance(reg, (int, np.integer)) and not isinstance(reg, bool):
            reg = Register.line(int(reg))
            object.__setattr__(self, "register", reg)
        if not isinstance(reg, Register):
            raise TypeError("register must be a Register or a qubit count")
        bad = [q for q in self.block.qubit_support if q >= reg.n_qubits]
        if bad:
            raise ValueError(f"block acts on qubits {bad} outside the {reg.n_qubits}-qubit register")
        self.block.parameters()  # names must be unambiguous within one circuit

    @property
    def n_qubits(self) -> int:
        return self.register.n_qubits

    def parameters(self) -> frozenset[Parameter]:
        return self.block.parameters()


# --------------------------------------------------------------------------
# text output

_NAMES = {
    GateKind.H: "HadamardGate",
    GateKind.X: "XGate",
    GateKind.Y: "YGate",
    GateKind.Z: "ZGate",
    GateKind.N: "NGate",
    GateKind.I: "IGate",
}


def _label(b: Block) -> str:
    qs = ",".join(str(q) for q in b.qubit_support)
    if isinstance(b, PrimitiveBlock):
        name = _NAMES.get(b.gate, b.gate.value)
        qs = ",".join(str(q) for q in b.support)
        extra = f" [angle: {b.angle}]" if b.angle is not None else ""
        text = f"{name}({qs}){extra}"
    elif isinstance(b, HamEvo):
        text = f"HamEvo({qs}) [t = {b.time}]"
    elif isinstance(b, ScaleBlock):
        text = f"[mul: {b.coeff}]"
    else:
        text = f"{type(b).__name__}({qs})"
    if b.tag:
        text += f" [tag: {b.tag}]"
    return text


def render_tree(block: Block) -> str:
    """Indented block tree, one node per line."""
    lines = [_label(block)]

    def rec(b: Block, prefix: str) -> None:
        kids = b.children()
        for i, c in enumerate(kids):
            last = i == len(kids) - 1
            lines.append(prefix + ("└── " if last else "├── ") + _label(c))
            rec(c, prefix + ("    " if last else "│   "))

    rec(block, "")
    return "\n".join(lines)


def to_text(block: Block) -> str:
    """Stable single-line dump, with expressions in S-expression form."""
    if isinstance(block, PrimitiveBlock):
        parts = [block.gate.value, *map(str, block.support)]
        if block.angle is not None:
            parts.append(to_sexpr(block.angle))
        body = " ".join(parts)
    elif isinstance(block, HamEvo):
        body = f"hamevo {to_text(block.generator)} {to_sexpr(block.time)}"
    elif isinstance(block, ScaleBlock):
        body = f"scale {to_sexpr(block.coeff)} {to_text(block.block)}"
    elif isinstance(block, CompositeBlock):
        kind = {ChainBlock: "chain", KronBlock: "kron", AddBlock: "add"}[type(block)]
        body = " ".join([kind, *(to_text(b) for b in block.blocks)])
    else:
        body = type(block).__name__
    if block.tag:
        body += f" :tag {block.tag}"
    return f"({body})"


def is_number(x: object) -> bool:
    return isinstance(x, (Real, np.floating, np.integer)) and not isinstance(x, bool)
