"""Command line demos. Each subcommand writes plot-ready CSV or JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from daqkit.blocks import RX, QuantumCircuit, X, kron, N, chain, render_tree, to_text
from daqkit.constructors import build_feature_map, build_hea, build_qft
from daqkit.daqc import build_da_qft, complete_graph_zz, solve_daqc
from daqkit.diff import DiffMode, GradientRequest, compute_gradient
from daqkit.dqc import (
    dqc_laplace_model,
    dqc_ode_model,
    grid_1d,
    grid_2d,
    train_dqc_laplace,
    train_dqc_ode,
)
from daqkit.hamiltonian import hamiltonian_factory, total_magnetization
from daqkit.optimize import TrainConfig
from daqkit.qubo import (
    EXAMPLE_Q,
    QuboProblem,
    brute_force,
    counts_cost,
    embed_qubo,
    embedding_residual,
    qaoa_model,
    solution_frequency,
    train_qaoa,
)
from daqkit.register import Register
from daqkit.simulator import phase_aligned_error, to_matrix
from daqkit.symexpr import FeatureParameter, acos


def _emit(name: str, rows: list[dict] | dict, args) -> None:
    """Write a table (list of rows) or a document to --out/name, or stdout."""
    if args.format == "json" or isinstance(rows, dict):
        text = json.dumps(rows, indent=2)
        suffix = ".json"
    else:
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
        text = buf.getvalue()
        suffix = ".csv"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}{suffix}").write_text(text)
    else:
        print(f"# {name}")
        print(text)


def _trace_rows(trace) -> list[dict]:
    return [{"iter": i, "loss": float(v)} for i, v in enumerate(trace)]


def cmd_dqc_ode(args) -> None:
    model = dqc_ode_model(args.qubits, args.depth, seed=args.seed)
    res = train_dqc_ode(model, TrainConfig(args.epochs, args.lr, seed=args.seed), n_points=args.points)
    x, pred, exact = grid_1d(model, 100)
    _emit("loss", _trace_rows(res.trace), args)
    _emit("solution", [{"x": a, "prediction": b, "exact": c} for a, b, c in zip(x, pred, exact)], args)
    print(
        json.dumps(
            {"final_loss": res.trace[-1] if res.trace else None,
             "max_abs_error": float(np.max(np.abs(pred - exact))),
             "mse": float(np.mean((pred - exact) ** 2))}
        ),
        file=sys.stderr,
    )


def cmd_dqc_laplace(args) -> None:
    model = dqc_laplace_model(args.qubits, args.depth, seed=args.seed)
    res, history = train_dqc_laplace(model, TrainConfig(args.epochs, args.lr, seed=args.seed), n_points=args.points)
    xx, yy, pred, exact = grid_2d(model, args.grid)
    _emit("loss", [{**r, **h} for r, h in zip(_trace_rows(res.trace), history)], args)
    _emit(
        "solution",
        [{"x": a, "y": b, "prediction": c, "exact": d} for a, b, c, d in zip(xx.ravel(), yy.ravel(), pred.ravel(), exact.ravel())],
        args,
    )
    print(json.dumps({"mse": float(np.mean((pred - exact) ** 2))}), file=sys.stderr)


def cmd_qubo(args) -> None:
    q = QuboProblem(EXAMPLE_Q, n_shots=args.shots, n_layers=args.layers)
    reg = embed_qubo(q.Q, seed=args.seed)
    model = qaoa_model(reg, q.n_layers, seed=args.seed)
    initial = model.sample({}, q.n_shots, seed=args.seed)[0]
    res = train_qaoa(model, q, TrainConfig(args.iters, optimizer="gradient_free", seed=args.seed))
    final = model.sample({}, q.n_shots, seed=args.seed + 1)[0]
    sols, best = brute_force(q.Q)
    _emit("loss", _trace_rows(res.trace), args)
    _emit(
        "counts",
        {
            "solutions": sols,
            "optimal_cost": best,
            "embedding_residual": embedding_residual(np.array(reg.coords), q.Q),
            "coordinates": [list(c) for c in reg.coords],
            "initial": {"counts": dict(sorted(initial.items())), "cost": counts_cost(initial, q.Q),
                        "solution_frequency": solution_frequency(initial, sols)},
            "optimized": {"counts": dict(sorted(final.items())), "cost": counts_cost(final, q.Q),
                          "solution_frequency": solution_frequency(final, sols)},
        },
        args,
    )


def _dft(n: int) -> np.ndarray:
    d = 2**n
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def _bit_reversal(n: int) -> np.ndarray:
    d = 2**n
    p = np.zeros((d, d))
    for i in range(d):
        p[int(format(i, f"0{n}b")[::-1], 2), i] = 1
    return p


def cmd_qft_check(args) -> None:
    n = args.qubits
    u = to_matrix(build_qft(range(n)), n)
    err = float(np.max(np.abs(u - _bit_reversal(n) @ _dft(n))))
    da = to_matrix(build_da_qft(n, "sdaqc", complete_graph_zz(n)), n)
    _emit("qft", {"n_qubits": n, "max_error_vs_dft": err, "da_qft_error": phase_aligned_error(da, u)}, args)


def cmd_daqc_check(args) -> None:
    t0 = time.perf_counter()
    reg = Register.triangular_lattice(2, 2, spacing=2.0)
    strengths = [1.0 / reg.distances[p] for p in reg.all_node_pairs]
    build = hamiltonian_factory(reg, "NN", strengths, detuning=X, detuning_strength="d", use_all_node_pairs=True)
    target = kron(N(0), N(1)) + kron(N(1), N(2)) + kron(N(2), N(0))
    t_f = 5.0
    sol = solve_daqc(reg.n_qubits, target, t_f, build)
    n = reg.n_qubits
    err = phase_aligned_error(to_matrix(sol.block, n), expm(-1j * t_f * to_matrix(target, n)))
    _emit(
        "daqc",
        {
            "target": to_text(target),
            "build": to_text(sol.build),
            "t_f": t_f,
            "times": sol.times,
            "flips": [list(f) for f in sol.flips],
            "local_rz": {str(k): v for k, v in sol.local_angles.items()},
            "global_phase": sol.global_phase,
            "max_unitary_error": err,
            "seconds": time.perf_counter() - t0,
        },
        args,
    )


def cmd_diff_check(args) -> None:
    x = FeatureParameter("x")
    n = 4
    block = kron(RX(i, (i + 1) * acos(x)) for i in range(n))
    circ = QuantumCircuit(n, block)
    obs = total_magnetization(n)
    xs = np.random.default_rng(args.seed).uniform(-0.99, 0.99, 10)
    grads = {
        m.value: compute_gradient(GradientRequest(circ, obs, {"x": xs}, ["x"], m))["x"][:, 0]
        for m in (DiffMode.GPSR, DiffMode.ADJOINT, DiffMode.FD)
    }
    dev = max(float(np.max(np.abs(grads[a] - grads[b]))) for a in grads for b in grads)
    rows = [{"x": float(v), **{k: float(g[i]) for k, g in grads.items()}} for i, v in enumerate(xs)]
    _emit("diff", rows, args)
    print(json.dumps({"max_pairwise_deviation": dev}), file=sys.stderr)


def cmd_dump(args) -> None:
    n = args.qubits
    blocks = {
        "qft": lambda: build_qft(range(n)),
        "da-qft": lambda: build_da_qft(n, "sdaqc", complete_graph_zz(n)),
        "hea": lambda: build_hea(n, args.depth),
        "fm": lambda: build_feature_map(n, "x", "chebyshev"),
        "dqc": lambda: chain(build_feature_map(n, "x", "chebyshev"), build_hea(n, args.depth)),
    }
    block = blocks[args.what]()
    print(to_text(block) if args.format == "json" else render_tree(block))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="daqkit", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=str, default=None, help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dqc-ode", parents=[common], help="train DQC on df/dx = 4x^3 + x^2 - 2x - 1/2")
    s.add_argument("--qubits", type=int, default=4)
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--epochs", type=int, default=1000)
    s.add_argument("--lr", type=float, default=0.01)
    s.add_argument("--points", type=int, default=20)
    s.set_defaults(func=cmd_dqc_ode)

    s = sub.add_parser("dqc-laplace", parents=[common], help="train DQC on the 2D Laplace equation")
    s.add_argument("--qubits", type=int, default=4)
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--epochs", type=int, default=1000)
    s.add_argument("--lr", type=float, default=0.01)
    s.add_argument("--points", type=int, default=100)
    s.add_argument("--grid", type=int, default=150)
    s.set_defaults(func=cmd_dqc_laplace)

    s = sub.add_parser("qubo", parents=[common], help="analog QAOA on the 5-variable example")
    s.add_argument("--iters", type=int, default=100)
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--layers", type=int, default=2)
    s.set_defaults(func=cmd_qubo)

    s = sub.add_parser("qft-check", parents=[common], help="QFT and DA-QFT unitary errors")
    s.add_argument("--qubits", type=int, default=3)
    s.set_defaults(func=cmd_qft_check)

    s = sub.add_parser("daqc-check", parents=[common], help="sDAQC transform on the triangular-lattice build")
    s.set_defaults(func=cmd_daqc_check)

    s = sub.add_parser("diff-check", parents=[common], help="GPSR / adjoint / FD agreement")
    s.set_defaults(func=cmd_diff_check)

    s = sub.add_parser("dump", parents=[common], help="print a circuit tree (json: s-expression)")
    s.add_argument("what", choices=("qft", "da-qft", "hea", "fm", "dqc"))
    s.add_argument("--qubits", type=int, default=3)
    s.add_argument("--depth", type=int, default=1)
    s.set_defaults(func=cmd_dump)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
