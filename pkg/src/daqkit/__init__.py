"""Digital-analog quantum programs: block IR, registers, Hamiltonians, simulation and training."""

from daqkit.blocks import (
    CNOT,
    CPHASE,
    CZ,
    RX,
    RY,
    RZ,
    AddBlock,
    Block,
    ChainBlock,
    GateKind,
    H,
    HamEvo,
    I,
    KronBlock,
    N,
    PrimitiveBlock,
    QuantumCircuit,
    ScaleBlock,
    X,
    Y,
    Z,
    add,
    chain,
    dagger,
    hamevo,
    kron,
    render_tree,
    scale,
    tag,
    to_text,
)
from daqkit.constructors import build_feature_map, build_hea, build_qft, parallel_feature_map
from daqkit.daqc import (
    AnalogInteraction,
    AnalogRot,
    AnalogRX,
    AnalogRY,
    AnalogRZ,
    DaqcTransformRequest,
    Strategy,
    build_da_qft,
    daqc_transform,
    lower_analog,
    solve_daqc,
)
from daqkit.diff import DiffMode, GradientRequest, compute_gradient, spectral_gaps
from daqkit.hamiltonian import (
    Interaction,
    RydbergParams,
    hamiltonian_factory,
    ising_hamiltonian,
    rydberg_hamiltonian,
    total_magnetization,
)
from daqkit.model import QuantumModel
from daqkit.optimize import TrainConfig, train_adam, train_gradient_free
from daqkit.register import Register
from daqkit.simulator import expectation, run, sample, to_matrix
from daqkit.symexpr import FeatureParameter, FixedParameter, VariationalParameter, acos, cos, exp, sin, sqrt

__all__ = [name for name in dir() if not name.startswith("_")]
