"""Mirror-image quantum state transfer in tight-binding chains.

Two protocols are implemented side by side: an engineered-hopping chain that
mirrors an excitation at odd multiples of pi/(2 Delta), and a uniform chain
coupled to a semi-infinite wire whose hoppings are sign-flipped at ``t_0`` so
the leaked excitation refocuses onto the mirror site at ``2 t_0``.
"""
from .hamiltonian import (
    ChainSpec,
    DisorderSpec,
    Edge,
    GraphError,
    SystemGraph,
    WireSpec,
    apply_disorder,
    attach_wire,
    build_engineered_chain,
    build_uniform_chain,
    build_wire,
    flip_wire_hoppings,
    min_wire_length,
    transfer_time,
)
from .spectral import (
    BoundStateReport,
    Spectrum,
    SymmetryReport,
    check_mirror_symmetry,
    detect_bound_states,
    eigendecompose,
    forbidden_sigma_ratios,
)
from .evolve import (
    Schedule,
    StateVector,
    Trajectory,
    bloch_amplitudes,
    chain_occupation,
    continuum_weight,
    propagate_segment,
    run_schedule,
    site_probability,
)
from .protocol import TransferResult, refocusing_deviation, run_scheme_a, run_scheme_b
from .ensemble import EnsembleStats, Setup, run_ensemble, summarize, sweep_disorder

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "DisorderSpec",
    "Edge",
    "GraphError",
    "SystemGraph",
    "WireSpec",
    "apply_disorder",
    "attach_wire",
    "build_engineered_chain",
    "build_uniform_chain",
    "build_wire",
    "flip_wire_hoppings",
    "min_wire_length",
    "transfer_time",
    "BoundStateReport",
    "Spectrum",
    "SymmetryReport",
    "check_mirror_symmetry",
    "detect_bound_states",
    "eigendecompose",
    "forbidden_sigma_ratios",
    "Schedule",
    "StateVector",
    "Trajectory",
    "bloch_amplitudes",
    "chain_occupation",
    "continuum_weight",
    "propagate_segment",
    "run_schedule",
    "site_probability",
    "TransferResult",
    "refocusing_deviation",
    "run_scheme_a",
    "run_scheme_b",
    "EnsembleStats",
    "Setup",
    "run_ensemble",
    "summarize",
    "sweep_disorder",
]
