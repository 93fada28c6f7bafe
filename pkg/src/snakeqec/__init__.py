"""Mobile surface-code logical qubits on a shuttling latticework.

The package simulates 1D serialised ("snake") surface-code qubits: layout
and shuttle embedding, circuit-level noise with defect dephasing, exact
minimum-weight decoding with complementary-gap statistics, monitor-qubit
angle sensing, charge-noise dephasing integrals, shuttle-reversal surgery
protocols, latticework routing, and end-to-end resilience estimates.
"""

from .dephasing import (
    DephasingPoint,
    DephasingResult,
    OUParams,
    SampledDephasing,
    ShuttleTrajectory,
    covariance,
    infidelity_curve,
    phase_variance,
    sample_ou_phase,
)
from .decoder import (
    DetectionGraph,
    GapResult,
    MatchResult,
    build_detection_graph,
    class_weights,
    complementary_gap,
    decode_mwpm,
)
from .distributions import AngleDistribution
from .geometry import (
    BatchState,
    CodeLayout,
    MeasurableSets,
    SnakeEmbedding,
    Stabiliser,
    build_rotated_surface_code,
    embed_snake,
    make_batch_plan,
    measurable_stabilisers,
)
from .io import RunManifest
from .latticework import (
    Junction,
    LatticeGraph,
    Route,
    StabiliserCycle,
    TimingParams,
    build_lattice,
    percolation_estimate,
    percolation_threshold,
    route_snake,
    shuttle_time_model,
)
from .monitor import (
    EstimatorStats,
    MonitorConfig,
    detection_threshold,
    estimator_task1,
    estimator_task2,
    false_negative_rate,
    false_positive_rate,
    outcome_prob,
    postselected_angle_density,
    purity_variance,
    qfi_factor,
    sample_purity_estimate,
    task1_distribution,
    task2_rms,
)
from .montecarlo import (
    ExperimentConfig,
    RateEstimate,
    ThresholdEstimate,
    estimate_logical_rate,
    gap_angle_distribution,
    gap_rejection_rate,
    gap_statistics,
    postselected_rate,
    threshold_scan,
    wilson_interval,
)
from .noise import (
    ErrorPattern,
    NoiseParams,
    apply_defect_round,
    cnot_table,
    hook_pairs,
    sample_circuit_noise,
)
from .resilience import (
    LogLinearRate,
    ResilienceInputs,
    ResilienceSummary,
    combine_distributions,
    defect_integral,
    distance_sweep,
    extrapolate_loglinear,
    extrapolate_rate_models,
    rejection_series,
    resilience_report,
    total_logical_rate,
    undetected_density,
)
from .surgery import (
    ProtocolStep,
    ProtocolTrace,
    PureState,
    fidelity,
    hydra_state,
    run_interacting_protocol,
    run_single_snake_protocol,
)

__all__ = [
    "AngleDistribution",
    "BatchState",
    "CodeLayout",
    "DephasingPoint",
    "DephasingResult",
    "DetectionGraph",
    "ErrorPattern",
    "EstimatorStats",
    "ExperimentConfig",
    "GapResult",
    "Junction",
    "LatticeGraph",
    "LogLinearRate",
    "MatchResult",
    "MeasurableSets",
    "MonitorConfig",
    "NoiseParams",
    "OUParams",
    "ProtocolStep",
    "ProtocolTrace",
    "PureState",
    "RateEstimate",
    "ResilienceInputs",
    "ResilienceSummary",
    "Route",
    "RunManifest",
    "SampledDephasing",
    "ShuttleTrajectory",
    "SnakeEmbedding",
    "Stabiliser",
    "StabiliserCycle",
    "ThresholdEstimate",
    "TimingParams",
    "apply_defect_round",
    "build_detection_graph",
    "build_lattice",
    "build_rotated_surface_code",
    "class_weights",
    "cnot_table",
    "combine_distributions",
    "complementary_gap",
    "covariance",
    "decode_mwpm",
    "defect_integral",
    "detection_threshold",
    "distance_sweep",
    "embed_snake",
    "estimate_logical_rate",
    "estimator_task1",
    "estimator_task2",
    "extrapolate_loglinear",
    "extrapolate_rate_models",
    "false_negative_rate",
    "false_positive_rate",
    "fidelity",
    "gap_angle_distribution",
    "gap_rejection_rate",
    "gap_statistics",
    "hook_pairs",
    "hydra_state",
    "infidelity_curve",
    "make_batch_plan",
    "measurable_stabilisers",
    "outcome_prob",
    "percolation_estimate",
    "percolation_threshold",
    "phase_variance",
    "postselected_angle_density",
    "postselected_rate",
    "purity_variance",
    "qfi_factor",
    "rejection_series",
    "resilience_report",
    "route_snake",
    "run_interacting_protocol",
    "run_single_snake_protocol",
    "sample_circuit_noise",
    "sample_ou_phase",
    "sample_purity_estimate",
    "shuttle_time_model",
    "task1_distribution",
    "task2_rms",
    "threshold_scan",
    "total_logical_rate",
    "undetected_density",
    "wilson_interval",
]

__version__ = "0.1.0"
