"""Controlled quantum secure communication over GHZ-like states.

A small statevector simulator (``sim``), the GHZ-like/Bell state family
(``states``), the full protocol state machine (``protocol``), the
N-controller generalization via entanglement swapping (``multictrl``), and
eavesdropping strategies with Monte-Carlo detection statistics
(``adversary``).
"""

from .sim import (
    BellKind,
    Gate,
    LabelError,
    MeasureBasis,
    ProjectionError,
    PureState,
    StateBag,
    apply_gate,
    basis_state,
    fidelity,
    measure,
    outcome_probabilities,
    relabel,
    same_state,
    single,
    tensor,
)
from .states import bell, classify_bell, ghz_collapse_kind, ghz_like, prepare_ghz_circuit
from .protocol import (
    DecoyPhoton,
    PauliOp,
    ProtocolConfig,
    ProtocolError,
    RunTranscript,
    efficiency,
    run_cqsc,
)
from .multictrl import (
    DistributionPlan,
    ParticleTag,
    PlanError,
    SwapSchedule,
    distribution_plan,
    run_swapping,
    shared_pair_from_outcomes,
    swap_schedule,
)
from .adversary import AttackKind, AttackStrategy, DetectionReport, TargetPhase, detection_stats

__version__ = "0.1.0"

__all__ = [
    "BellKind", "Gate", "LabelError", "MeasureBasis", "ProjectionError",
    "PureState", "StateBag", "apply_gate", "basis_state", "fidelity",
    "measure", "outcome_probabilities", "relabel", "same_state", "single",
    "tensor",
    "bell", "classify_bell", "ghz_collapse_kind", "ghz_like", "prepare_ghz_circuit",
    "DecoyPhoton", "PauliOp", "ProtocolConfig", "ProtocolError",
    "RunTranscript", "efficiency", "run_cqsc",
    "DistributionPlan", "ParticleTag", "PlanError", "SwapSchedule",
    "distribution_plan", "run_swapping", "shared_pair_from_outcomes", "swap_schedule",
    "AttackKind", "AttackStrategy", "DetectionReport", "TargetPhase", "detection_stats",
    "__version__",
]
