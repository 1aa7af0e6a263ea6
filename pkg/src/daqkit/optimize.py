"""Training loops over a model's variational parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

import numpy as np

from daqkit.errors import NaNLoss
from daqkit.model import QuantumModel

# loss_fn(model, rng) -> (loss, {name: dloss/dname}) for Adam, -> loss for the gradient-free search
GradLossFn = Callable[[QuantumModel, np.random.Generator], tuple[float, Mapping[str, float]]]
LossFn = Callable[[QuantumModel, np.random.Generator], float]


class OptimizerKind(str, Enum):
    ADAM = "adam"
    GRADIENT_FREE = "gradient_free"


@dataclass
class TrainConfig:
    max_iter: int = 100
    learning_rate: float = 0.01
    optimizer: OptimizerKind = OptimizerKind.ADAM
    seed: int = 0

    def __post_init__(self) -> None:
        self.optimizer = OptimizerKind(self.optimizer)
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")


@dataclass
class TrainResult:
    model: QuantumModel
    trace: list[float] = field(default_factory=list)
    evaluations: int = 0


def _check(loss: float, trace: list[float]) -> None:
    if not math.isfinite(loss):
        raise NaNLoss(f"loss became {loss} after {len(trace)} iterations", trace)


def train_adam(
    model: QuantumModel,
    loss_fn: GradLossFn,
    cfg: TrainConfig,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    callback: Callable[[int, float], None] | None = None,
) -> TrainResult:
    """Adam on the model's variational parameters; trace holds the loss before each step."""
    rng = np.random.default_rng(cfg.seed)
    names = model.param_names
    theta = model.get_vector()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    trace: list[float] = []
    for it in range(1, cfg.max_iter + 1):
        loss, grads = loss_fn(model, rng)
        loss = float(loss)
        trace.append(loss)
        _check(loss, trace)
        g = np.array([float(grads.get(k, 0.0)) for k in names])
        if not np.all(np.isfinite(g)):
            raise NaNLoss(f"non-finite gradient at iteration {it}", trace)
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        mhat = m / (1 - beta1**it)
        vhat = v / (1 - beta2**it)
        theta = theta - cfg.learning_rate * mhat / (np.sqrt(vhat) + eps)
        model.set_vector(theta)
        if callback is not None:
            callback(it, loss)
    return TrainResult(model, trace, cfg.max_iter)


def train_gradient_free(
    model: QuantumModel,
    loss_fn: LossFn,
    cfg: TrainConfig,
    sigma0: float | None = None,
) -> TrainResult:
    """(1+1) evolution strategy with the one-fifth success rule.

    The incumbent is evaluated once, then ``max_iter`` Gaussian candidates.
    A candidate replaces the incumbent when its loss is not worse. The step
    grows by exp(1/3) on success and shrinks by exp(-1/12) otherwise, which
    is stationary at a 1/5 success rate. The trace is the best loss so far,
    one entry per evaluation.
    """
    rng = np.random.default_rng(cfg.seed)
    sigma = cfg.learning_rate if sigma0 is None else sigma0
    best_x = model.get_vector()
    best = float(loss_fn(model, rng))
    trace = [best]
    _check(best, trace)
    up, down = math.exp(1.0 / 3.0), math.exp(-1.0 / 12.0)
    for _ in range(cfg.max_iter):
        cand = best_x + sigma * rng.standard_normal(best_x.shape)
        model.set_vector(cand)
        loss = float(loss_fn(model, rng))
        if math.isfinite(loss) and loss <= best:
            best, best_x = loss, cand
            sigma *= up
        else:
            sigma *= down
        trace.append(best)
    model.set_vector(best_x)
    return TrainResult(model, trace, cfg.max_iter + 1)


def train(model: QuantumModel, loss_fn, cfg: TrainConfig) -> TrainResult:
    if cfg.optimizer is OptimizerKind.ADAM:
        return train_adam(model, loss_fn, cfg)
    return train_gradient_free(model, loss_fn, cfg)
