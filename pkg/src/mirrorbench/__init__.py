"""Toolkit for turning quantum circuits into scalable process-fidelity benchmarks."""

from mirrorbench.circuits import (
    CapacityError,
    Circuit,
    ContractError,
    CouplingGraph,
    GateOp,
    PauliFrame,
    inverse,
    layerize,
    merge_1q,
    propagate_frame,
    unitary_of,
)
from mirrorbench.sim import (
    NoiseModel,
    OutcomeDistribution,
    ShotTable,
    exact_process_fidelity,
    ideal_distribution,
    noisy_distribution,
    process_fidelity_unitaries,
    sample_shots,
)
from mirrorbench.mirror import MirrorCircuit, SamplingParams, build_suite
from mirrorbench.transpile import TranspileConfig, transpile
from mirrorbench.algos import (
    PauliSumHamiltonian,
    TrotterSpec,
    algorithmic_process_fidelity,
    brickwork_u3_cz,
    full_process_fidelity,
    heisenberg,
    max3sat,
    qaoa_circuit,
    qft_circuit,
    tfim,
    trotter_circuit,
)
from mirrorbench.bench import (
    ShapeSpec,
    build_full_stack,
    build_low_level,
    build_subcircuit,
    snip,
)
from mirrorbench.analysis import (
    EffectiveErrorRate,
    FidelityRecord,
    classical_fidelity,
    effective_error_rate,
    effective_polarization,
    mcfe_estimate,
    normalized_classical_fidelity,
    predict_full_fidelity,
)
from mirrorbench.qasm import parse_qasm, serialize_qasm

__all__ = [
    "CapacityError",
    "Circuit",
    "ContractError",
    "CouplingGraph",
    "GateOp",
    "PauliFrame",
    "inverse",
    "layerize",
    "merge_1q",
    "propagate_frame",
    "unitary_of",
    "NoiseModel",
    "OutcomeDistribution",
    "ShotTable",
    "exact_process_fidelity",
    "ideal_distribution",
    "noisy_distribution",
    "process_fidelity_unitaries",
    "sample_shots",
    "MirrorCircuit",
    "SamplingParams",
    "build_suite",
    "TranspileConfig",
    "transpile",
    "PauliSumHamiltonian",
    "TrotterSpec",
    "algorithmic_process_fidelity",
    "brickwork_u3_cz",
    "full_process_fidelity",
    "heisenberg",
    "max3sat",
    "qaoa_circuit",
    "qft_circuit",
    "tfim",
    "trotter_circuit",
    "ShapeSpec",
    "build_full_stack",
    "build_low_level",
    "build_subcircuit",
    "snip",
    "EffectiveErrorRate",
    "FidelityRecord",
    "classical_fidelity",
    "effective_error_rate",
    "effective_polarization",
    "mcfe_estimate",
    "normalized_classical_fidelity",
    "predict_full_fidelity",
    "parse_qasm",
    "serialize_qasm",
]

__version__ = "0.1.0"
