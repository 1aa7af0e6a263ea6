"""Quantum model: circuit, observables and trainable parameter values."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from daqkit.blocks import Block, QuantumCircuit
from daqkit.diff import (
    DiffMode,
    GradientRequest,
    ShiftTerm,
    adjoint_jacobian,
    batch_size,
    compute_gradient,
    expansion_for,
    stacked_shifts,
    tile_values,
)
from daqkit.simulator import compile_circuit, expectation, sample_state
from daqkit.symexpr import Kind, evaluate


class QuantumModel:
    """Bundles a circuit with observables and current variational values.

    Variational parameters start uniform in [0, 2*pi) drawn from ``seed``, in
    sorted name order. Feature values are supplied per call.
    """

    def __init__(
        self,
        circuit: QuantumCircuit,
        observable: Block | Sequence[Block] | None = None,
        diff_mode: DiffMode | str = DiffMode.GPSR,
        seed: int = 0,
        var_params: Mapping[str, float] | None = None,
    ):
        self.circuit = circuit
        if observable is None:
            self.observables: list[Block] = []
        elif isinstance(observable, Block):
            self.observables = [observable]
        else:
            self.observables = list(observable)
        self.diff_mode = DiffMode(diff_mode)
        self.seed = seed
        self.program = compile_circuit(circuit)

        params = set(circuit.parameters())
        for o in self.observables:
            params |= set(o.parameters())
        self.param_names = sorted(p.name for p in params if p.kind is Kind.VARIATIONAL)
        self.feature_names = sorted(p.name for p in params if p.kind is Kind.FEATURE)
        rng = np.random.default_rng(seed)
        init = rng.uniform(0.0, 2.0 * np.pi, len(self.param_names))
        self.var_params: dict[str, float] = dict(zip(self.param_names, init.tolist()))
        if var_params is not None:
            self.update(var_params)

    # ---- parameters
    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    def update(self, new: Mapping[str, float]) -> None:
        unknown = set(new) - set(self.param_names)
        if unknown:
            raise KeyError(f"not variational parameters of this model: {sorted(unknown)}")
        self.var_params.update({k: float(v) for k, v in new.items()})

    def get_vector(self) -> np.ndarray:
        return np.array([self.var_params[k] for k in self.param_names])

    def set_vector(self, vec: Sequence[float]) -> None:
        self.var_params = dict(zip(self.param_names, map(float, vec)))

    def values(self, features: Mapping[str, object] | None = None) -> dict:
        out: dict = dict(self.var_params)
        for k, v in (features or {}).items():
            if k in self.var_params:
                raise KeyError(f"'{k}' is variational; update it through the model")
            out[k] = v
        return out

    # ---- execution
    def run(self, features=None, state=None) -> np.ndarray:
        return self.program.run(self.values(features), state)

    def expectation(self, features=None, state=None) -> np.ndarray:
        """Shape (batch, n_observables)."""
        if not self.observables:
            raise ValueError("model has no observable")
        return expectation(self.program, self.observables, self.values(features), state)

    def __call__(self, features=None, state=None) -> np.ndarray:
        return self.expectation(features, state)[:, 0]

    def sample(self, features=None, n_shots: int = 100, seed: int | None = None, state=None) -> list:
        psi = self.run(features, state)
        return sample_state(psi, n_shots, np.random.default_rng(seed), self.program.n_qubits)

    def probabilities(self, features=None, state=None) -> np.ndarray:
        psi = self.run(features, state)
        return np.abs(psi) ** 2

    def gradient(self, features=None, wrt: Sequence[str] | None = None, state=None) -> dict[str, np.ndarray]:
        """d<O>/d name for each name in ``wrt`` (default: all variational), shape (batch, n_obs)."""
        wrt = list(self.param_names if wrt is None else wrt)
        req = GradientRequest(self.program, self.observables, self.values(features), wrt, self.diff_mode, state)
        return compute_gradient(req).gradients

    # ---- feature derivatives for physics-informed losses
    def value(self, features: Mapping[str, object]) -> np.ndarray:
        return self(features)

    def derivative(self, features: Mapping[str, object], names: Sequence[str]) -> np.ndarray:
        return self.derivative_and_jacobian(features, [tuple(names)], jacobian=False)[0]

    def derivative_and_jacobian(
        self,
        features: Mapping[str, object],
        orders: Sequence[Sequence[str]],
        jacobian: bool = True,
    ) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        """Sum of feature derivatives of the first observable and its parameter gradient.

        Each entry of ``orders`` is a tuple of feature names, e.g. ``("x", "x")``
        for the second derivative; ``()`` is the plain output. The shift
        expansions are merged, all shifted configurations run as one stacked
        batch, and the variational gradient of every configuration comes from
        a single adjoint sweep.
        """
        vals = self.values(features)
        terms: list[ShiftTerm] = []
        for names in orders:
            terms += expansion_for(self.program, list(names), vals) if names else [ShiftTerm(1.0)]
        b = batch_size(vals)
        configs = sorted({t.shifts for t in terms})
        pos = {c: i for i, c in enumerate(configs)}
        big = tile_values(vals, b, len(configs))
        shifts = stacked_shifts(configs, b)
        obs = self.observables[0]
        wrt = self.param_names if jacobian else []
        res = adjoint_jacobian(self.program, obs, big, wrt, None, shifts)
        f = np.broadcast_to(res.values, (len(configs) * b,)).reshape(len(configs), b)
        jac = {k: np.broadcast_to(v, (len(configs) * b,)).reshape(len(configs), b) for k, v in res.jacobian.items()}
        total = np.zeros(b)
        grads = {k: np.zeros(b) for k in wrt}
        for t in terms:
            coef = np.full(b, t.weight)
            for fct in t.factors:
                coef = coef * np.asarray(evaluate(fct, vals), dtype=float)
            i = pos[t.shifts]
            total = total + coef * f[i]
            for k in wrt:
                grads[k] = grads[k] + coef * jac[k][i]
        return total, grads
