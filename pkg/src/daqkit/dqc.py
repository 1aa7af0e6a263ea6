"""Differentiable quantum circuits for a non-linear ODE and the 2D Laplace equation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np

from daqkit.blocks import QuantumCircuit, chain
from daqkit.constructors import build_feature_map, build_hea, parallel_feature_map
from daqkit.errors import DomainError
from daqkit.hamiltonian import ising_hamiltonian
from daqkit.model import QuantumModel
from daqkit.optimize import TrainConfig, TrainResult, train_adam

Features = Mapping[str, np.ndarray]


class Predictor(Protocol):
    def value(self, features: Features) -> np.ndarray: ...

    def derivative(self, features: Features, names: Sequence[str]) -> np.ndarray: ...


@dataclass
class FunctionPredictor:
    """Wraps a plain function; derivatives not supplied use nested central differences."""

    fn: Callable[..., np.ndarray]
    derivatives: Mapping[tuple[str, ...], Callable[..., np.ndarray]] | None = None
    h: float = 1e-3

    def value(self, features: Features) -> np.ndarray:
        return np.asarray(self.fn(**features), dtype=float) * np.ones(_batch(features))

    def derivative(self, features: Features, names: Sequence[str]) -> np.ndarray:
        names = tuple(names)
        if not names:
            return self.value(features)
        if self.derivatives and names in self.derivatives:
            return np.asarray(self.derivatives[names](**features), dtype=float) * np.ones(_batch(features))
        head, rest = names[0], names[1:]
        plus, minus = dict(features), dict(features)
        plus[head] = np.asarray(features[head]) + self.h
        minus[head] = np.asarray(features[head]) - self.h
        return (self.derivative(plus, rest) - self.derivative(minus, rest)) / (2 * self.h)


def _batch(features: Features) -> int:
    return max((np.size(v) for v in features.values()), default=1)


# --------------------------------------------------------------------------
# ODE  df/dx = 4x^3 + x^2 - 2x - 1/2,  f(0) = 1


def ode_rhs(x):
    return 4 * x**3 + x**2 - 2 * x - 0.5


def ode_exact(x):
    return x**4 + x**3 / 3 - x**2 - x / 2 + 1


def ode_points(rng: np.random.Generator, n_points: int = 20, low: float = -0.99, high: float = 0.99) -> np.ndarray:
    return rng.uniform(low, high, n_points)


def _check_chebyshev(x: np.ndarray) -> None:
    if np.any(np.abs(x) >= 1.0):
        raise DomainError("collocation points must lie strictly inside (-1, 1)")


def dqc_ode_loss(model: Predictor, points: np.ndarray) -> float:
    """mean[(f'(x) - rhs(x))^2] + (f(0) - 1)^2."""
    x = np.asarray(points, dtype=float)
    _check_chebyshev(x)
    dfdx = model.derivative({"x": x}, ["x"])
    f0 = model.value({"x": np.zeros(1)})
    return float(np.mean((dfdx - ode_rhs(x)) ** 2) + np.mean((f0 - 1.0) ** 2))


def dqc_ode_loss_and_grad(model: QuantumModel, points: np.ndarray) -> tuple[float, dict[str, float]]:
    x = np.asarray(points, dtype=float)
    _check_chebyshev(x)
    d, jd = model.derivative_and_jacobian({"x": x}, [("x",)])
    f0, j0 = model.derivative_and_jacobian({"x": np.zeros(1)}, [()])
    r = d - ode_rhs(x)
    r0 = f0 - 1.0
    loss = float(np.mean(r**2) + np.mean(r0**2))
    grads = {k: float(np.mean(2 * r * jd[k]) + np.mean(2 * r0 * j0[k])) for k in model.param_names}
    return loss, grads


def dqc_ode_model(n_qubits: int = 4, depth: int = 3, seed: int = 0) -> QuantumModel:
    fm = build_feature_map(n_qubits, "x", "chebyshev")
    circuit = QuantumCircuit(n_qubits, chain(fm, build_hea(n_qubits, depth)))
    return QuantumModel(circuit, ising_hamiltonian(n_qubits), seed=seed)


def train_dqc_ode(
    model: QuantumModel,
    cfg: TrainConfig,
    n_points: int = 20,
) -> TrainResult:
    """Adam with fresh uniform collocation points every epoch."""

    def loss_fn(m, rng):
        return dqc_ode_loss_and_grad(m, ode_points(rng, n_points))

    return train_adam(model, loss_fn, cfg)


# --------------------------------------------------------------------------
# Laplace  u_xx + u_yy = 0 on [0,1]^2,  u(0,y) = sin(pi y), zero on the other edges

LAPLACE_TERMS = ("left", "right", "top", "bottom", "interior")


def laplace_exact(x, y):
    return np.exp(-np.pi * x) * np.sin(np.pi * y)


def laplace_samples(rng: np.random.Generator, n_points: int = 100) -> dict[str, dict[str, np.ndarray]]:
    """Uniform points per region; one coordinate is pinned on each edge."""
    out = {}
    for region in LAPLACE_TERMS:
        x, y = rng.random(n_points), rng.random(n_points)
        if region == "left":
            x = np.zeros(n_points)
        elif region == "right":
            x = np.ones(n_points)
        elif region == "top":
            y = np.ones(n_points)
        elif region == "bottom":
            y = np.zeros(n_points)
        out[region] = {"x": x, "y": y}
    return out


def _edge_target(region: str, pts: Mapping[str, np.ndarray]) -> np.ndarray:
    if region == "left":
        return np.sin(np.pi * pts["y"])
    return np.zeros_like(pts["x"])


LAPLACIAN = (("x", "x"), ("y", "y"))


def laplace_terms(model: Predictor, samples: Mapping[str, Mapping[str, np.ndarray]]) -> dict[str, float]:
    """Mean squared residual per boundary edge and for the interior Laplacian."""
    out = {}
    for region in LAPLACE_TERMS:
        pts = samples[region]
        if region == "interior":
            r = sum(model.derivative(pts, names) for names in LAPLACIAN)
        else:
            r = model.value(pts) - _edge_target(region, pts)
        out[region] = float(np.mean(r**2))
    return out


def dqc_laplace_loss(model: Predictor, samples: Mapping[str, Mapping[str, np.ndarray]]) -> float:
    return float(sum(laplace_terms(model, samples).values()))


def dqc_laplace_loss_and_grad(
    model: QuantumModel, samples: Mapping[str, Mapping[str, np.ndarray]]
) -> tuple[float, dict[str, float], dict[str, float]]:
    loss = 0.0
    grads = {k: 0.0 for k in model.param_names}
    terms = {}
    for region in LAPLACE_TERMS:
        pts = samples[region]
        if region == "interior":
            r, jac = model.derivative_and_jacobian(pts, LAPLACIAN)
        else:
            u, jac = model.derivative_and_jacobian(pts, [()])
            r = u - _edge_target(region, pts)
        terms[region] = float(np.mean(r**2))
        loss += terms[region]
        for k in grads:
            grads[k] += float(np.mean(2 * r * jac[k]))
    return loss, grads, terms


def dqc_laplace_model(n_qubits: int = 4, depth: int = 3, seed: int = 0) -> QuantumModel:
    fm = parallel_feature_map(n_qubits, ["x", "y"], "fourier")
    circuit = QuantumCircuit(n_qubits, chain(fm, build_hea(n_qubits, depth)))
    return QuantumModel(circuit, ising_hamiltonian(n_qubits), seed=seed)


def train_dqc_laplace(model: QuantumModel, cfg: TrainConfig, n_points: int = 100) -> tuple[TrainResult, list[dict[str, float]]]:
    """Adam with fresh samples per epoch; also returns the per-term loss history."""
    history: list[dict[str, float]] = []

    def loss_fn(m, rng):
        loss, grads, terms = dqc_laplace_loss_and_grad(m, laplace_samples(rng, n_points))
        history.append(terms)
        return loss, grads

    return train_adam(model, loss_fn, cfg), history


def grid_1d(model: Predictor, n: int = 100, low: float = -1.0, high: float = 1.0):
    """Prediction and exact ODE solution on an even grid (edges included)."""
    x = np.linspace(low, high, n)
    return x, model.value({"x": x}), ode_exact(x)


def grid_2d(model: Predictor, n: int = 150):
    g = np.linspace(0.0, 1.0, n)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    pts = {"x": xx.ravel(), "y": yy.ravel()}
    return xx, yy, model.value(pts).reshape(n, n), laplace_exact(xx, yy)
