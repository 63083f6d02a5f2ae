"""Adaptive consensus protocols for linear multi-agent systems on directed
graphs: graph certificates, Riccati-based gain synthesis, protocol
simulation, and residual-bound analysis."""

from .agents import (
    AgentModel,
    ChuaLeader,
    SinusoidLeader,
    ZeroLeader,
    agent_derivative,
    chua_input,
    chua_system,
    leader_input,
    leader_omega,
    load_model,
    save_model,
)
from .analysis import (
    AnalysisConstants,
    ConsensusMetrics,
    ResidualBound,
    compute_constants,
    consensus_metrics,
    residual_bound,
)
from .gains import (
    GainSet,
    certify,
    choose_beta,
    design_output_gains,
    design_q,
    design_state_gains,
    load_gains,
    save_gains,
)
from .graphs import (
    DirectedGraph,
    LaplacianBundle,
    LeaderCertificate,
    LeaderlessCertificate,
    build_laplacian,
    has_spanning_tree_rooted_at,
    is_strongly_connected,
    left_null_vector,
    mmatrix_scaling,
    read_graph_file,
    spectral_certificate,
    symmetrized_laplacian,
    write_graph_file,
)
from .linalg import (
    DEFAULT_POLICY,
    NumericPolicy,
    eigenvalues,
    is_hurwitz,
    is_positive_definite,
    solve_care,
    solve_lyapunov,
    stabilizing_gain_bass,
)
from .protocols import (
    DerivedSignals,
    NetworkState,
    ProtocolContext,
    ProtocolKind,
    boundary_layer_direction,
    closed_loop_error_derivative,
    derive_signals,
    protocol_derivative,
    unit_direction,
)
from .simulate import (
    SimConfig,
    SimulationTrace,
    initial_state,
    lyapunov_monitor,
    read_trace_csv,
    simulate,
    trace_to_csv,
)

__version__ = "0.1.0"
