"""Digital circuit constructors: QFT, hardware-efficient ansatz, feature maps."""

from __future__ import annotations

from typing import Sequence

from daqkit.blocks import CNOT, CPHASE, RX, RY, Block, H, chain, kron
from daqkit.errors import DuplicateQubit
from daqkit.symexpr import PI, Expression, FeatureParameter, acos, as_expression


def qft_layer(qubits: Sequence[int], layer: int) -> Block:
    """H on ``qubits[layer]`` followed by its controlled phases.

    CPHASE(qubits[j], qubits[layer], pi / 2**(j - layer)) for every j > layer.
    """
    phases = [
        CPHASE(qubits[j], qubits[layer], PI / 2 ** (j - layer))
        for j in range(layer + 1, len(qubits))
    ]
    if not phases:
        return H(qubits[layer])
    return chain(H(qubits[layer]), *phases)


def build_qft(support: Sequence[int]) -> Block:
    """Digital QFT without the final qubit reversal.

    The unitary equals ``P @ F`` with ``F`` the DFT matrix
    ``exp(2*pi*i*j*k / 2**n) / sqrt(2**n)`` and ``P`` the bit-reversal
    permutation of the output index.
    """
    qs = list(support)
    if not qs:
        raise ValueError("QFT needs at least one qubit")
    if len(set(qs)) != len(qs):
        raise DuplicateQubit(f"QFT support {qs} repeats a qubit")
    if len(qs) == 1:
        return H(qs[0]).tagged("QFT")
    return chain(qft_layer(qs, layer) for layer in range(len(qs))).tagged("QFT")


def hea_param_name(layer: int, qubit: int, rot: int) -> str:
    return f"theta_{layer}_{qubit}_{rot}"


def build_hea(n_qubits: int, depth: int = 1, support: Sequence[int] | None = None) -> Block:
    """Hardware-efficient ansatz.

    Each layer applies RX, RY, RX on every qubit (fresh variational angles
    named ``theta_{layer}_{qubit}_{rot}``) followed by a CNOT ladder.
    """
    if n_qubits < 2:
        raise ValueError("the HEA needs at least two qubits")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    qs = list(range(n_qubits)) if support is None else list(support)
    if len(qs) != n_qubits:
        raise ValueError("support length must equal n_qubits")
    layers = []
    for d in range(depth):
        rots = kron(
            chain(
                RX(q, hea_param_name(d, q, 0)),
                RY(q, hea_param_name(d, q, 1)),
                RX(q, hea_param_name(d, q, 2)),
            )
            for q in qs
        )
        ladder = chain(CNOT(qs[i], qs[i + 1]) for i in range(len(qs) - 1))
        layers.append(chain(rots, ladder))
    return chain(layers).tagged("HEA")


def build_feature_map(
    n_qubits: int,
    param: str | Expression = "phi",
    fm_type: str = "fourier",
    support: Sequence[int] | None = None,
) -> Block:
    """RX(q, f(param)) on every qubit, f = identity (fourier) or acos (chebyshev).

    A string ``param`` becomes a feature parameter.
    """
    qs = list(range(n_qubits)) if support is None else list(support)
    if len(qs) != n_qubits:
        raise ValueError("support length must equal n_qubits")
    x = FeatureParameter(param) if isinstance(param, str) else as_expression(param)
    if fm_type == "fourier":
        angle = x
    elif fm_type == "chebyshev":
        angle = acos(x)
    else:
        raise ValueError(f"unknown feature map type {fm_type!r}")
    return kron(RX(q, angle) for q in qs).tagged(f"FM({fm_type})")


def parallel_feature_map(
    n_qubits: int, params: Sequence[str], fm_type: str = "fourier"
) -> Block:
    """One feature map per variable over consecutive, equal qubit slices."""
    split = n_qubits // len(params)
    if split < 1:
        raise ValueError("not enough qubits for one slice per variable")
    return kron(
        build_feature_map(split, p, fm_type, support=range(i * split, (i + 1) * split))
        for i, p in enumerate(params)
    )
