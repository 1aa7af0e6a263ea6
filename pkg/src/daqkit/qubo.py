"""QUBO solving with a fully analog QAOA ansatz on an embedded Rydberg register."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.distance import pdist, squareform

from daqkit.blocks import QuantumCircuit, chain
from daqkit.daqc import AnalogRX, AnalogRZ
from daqkit.errors import EmbeddingNotConverged
from daqkit.hamiltonian import C6_DEFAULT, RydbergParams
from daqkit.model import QuantumModel
from daqkit.optimize import TrainConfig, TrainResult, train_gradient_free
from daqkit.register import Register

# 5-variable instance whose minima are 01011 and 00111
EXAMPLE_Q = np.array(
    [
        [-10.0, 19.7365809, 19.7365809, 5.42015853, 5.42015853],
        [19.7365809, -10.0, 20.67626392, 0.17675796, 0.85604541],
        [19.7365809, 20.67626392, -10.0, 0.85604541, 0.17675796],
        [5.42015853, 0.17675796, 0.85604541, -10.0, 0.32306662],
        [5.42015853, 0.85604541, 0.17675796, 0.32306662, -10.0],
    ]
)


@dataclass
class QuboProblem:
    Q: np.ndarray
    n_shots: int = 1000
    n_layers: int = 2

    def __post_init__(self) -> None:
        self.Q = np.asarray(self.Q, dtype=float)
        if self.Q.ndim != 2 or self.Q.shape[0] != self.Q.shape[1]:
            raise ValueError("Q must be a square matrix")
        if not np.array_equal(self.Q, self.Q.T):
            raise ValueError("Q must be exactly symmetric")
        if self.n_shots < 1 or self.n_layers < 1:
            raise ValueError("n_shots and n_layers must be >= 1")

    @property
    def n(self) -> int:
        return self.Q.shape[0]


def bits(bitstring: str) -> np.ndarray:
    """0/1 vector; character i is qubit i."""
    return np.array([int(c) for c in bitstring], dtype=float)


def qubo_cost(bitstring: str, Q: np.ndarray) -> float:
    z = bits(bitstring)
    return float(z @ Q @ z)


def all_costs(Q: np.ndarray) -> dict[str, float]:
    n = len(Q)
    return {"".join(b): qubo_cost("".join(b), Q) for b in itertools.product("01", repeat=n)}


def brute_force(Q: np.ndarray, tol: float = 1e-9) -> tuple[list[str], float]:
    """All minimum-cost bitstrings and the minimum."""
    costs = all_costs(Q)
    best = min(costs.values())
    return sorted(k for k, v in costs.items() if v <= best + tol * max(1.0, abs(best))), best


def counts_cost(counts: Mapping[str, int], Q: np.ndarray, n_shots: int | None = None) -> float:
    total = sum(counts.values()) if n_shots is None else n_shots
    return float(sum(c * qubo_cost(b, Q) for b, c in counts.items()) / total)


def qubo_loss(model: QuantumModel, q: QuboProblem, seed: int | None = None) -> float:
    """Sampled mean cost over ``n_shots`` bitstrings."""
    counts = model.sample({}, n_shots=q.n_shots, seed=seed)[0]
    return counts_cost(counts, q.Q, q.n_shots)


def qubo_exact_loss(model: QuantumModel, q: QuboProblem) -> float:
    """Infinite-shot limit: sum_b |psi_b|^2 cost(b)."""
    p = model.probabilities({})[0]
    costs = np.array([qubo_cost(format(i, f"0{q.n}b"), q.Q) for i in range(2**q.n)])
    return float(p @ costs)


def embedding_residual(coords: np.ndarray, Q: np.ndarray, c6: float = C6_DEFAULT) -> float:
    """Frobenius distance between C6/r^6 couplings and the off-diagonal of Q."""
    d = pdist(np.reshape(coords, (len(Q), 2)))
    with np.errstate(divide="ignore", over="ignore"):
        coupling = squareform(c6 / d**6)
    off = Q - np.diag(np.diag(Q))
    r = np.linalg.norm(coupling - off)
    return float(r) if np.isfinite(r) else 1e300


def embed_qubo(
    Q: np.ndarray,
    seed: int = 0,
    c6: float = C6_DEFAULT,
    tol: float = 1e-6,
    maxiter: int = 200000,
) -> Register:
    """Atom positions whose van der Waals couplings approximate the off-diagonal of Q.

    Nelder-Mead over the 2n coordinates from a seeded uniform start in the
    unit square. Warns EmbeddingNotConverged if the search stops early.
    """
    Q = np.asarray(Q, dtype=float)
    n = len(Q)
    x0 = np.random.default_rng(seed).random((n, 2)).ravel()
    res = minimize(
        embedding_residual,
        x0,
        args=(Q, c6),
        method="Nelder-Mead",
        tol=tol,
        options={"maxiter": maxiter, "maxfev": maxiter, "xatol": tol, "fatol": tol, "adaptive": n > 3},
    )
    if not res.success:
        warnings.warn(f"embedding search stopped early: {res.message}", EmbeddingNotConverged, stacklevel=2)
    return Register.from_coordinates([tuple(p) for p in np.reshape(res.x, (n, 2))])


def qaoa_block(n_layers: int = 2, device: RydbergParams | None = None):
    """Alternating global X and Z analog rotations with angles t{i}, s{i}."""
    return chain(
        blk for i in range(n_layers) for blk in (AnalogRX(f"t{i}", device), AnalogRZ(f"s{i}", device))
    )


def qaoa_model(register: Register, n_layers: int = 2, seed: int = 0, device: RydbergParams | None = None) -> QuantumModel:
    circuit = QuantumCircuit(register, qaoa_block(n_layers, device))
    return QuantumModel(circuit, seed=seed)


def train_qaoa(model: QuantumModel, q: QuboProblem, cfg: TrainConfig, sigma0: float = 0.5) -> TrainResult:
    """Gradient-free search on the sampled cost; every evaluation draws a fresh seed."""

    def loss_fn(m, rng):
        return qubo_loss(m, q, seed=int(rng.integers(2**63)))

    return train_gradient_free(model, loss_fn, cfg, sigma0=sigma0)


def solution_frequency(counts: Mapping[str, int], solutions) -> float:
    total = sum(counts.values())
    return sum(counts.get(s, 0) for s in solutions) / total
