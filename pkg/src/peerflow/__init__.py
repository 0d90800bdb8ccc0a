"""peerflow: peer-assessment workflow engine for programming courses."""

from .errors import (
    AuthorizationError,
    NotFoundError,
    PeerFlowError,
    StateError,
    ValidationError,
)
from .scoring import (
    DEFAULT_RUBRIC,
    BonusDelta,
    CodeReview,
    MotivationParams,
    ReverseReview,
    ReviewGroup,
    Rubric,
    ScoreSheet,
    WeightConfig,
    compute_bonus,
    default_rubric,
    overall_score,
    score_code_review,
    score_reverse_review,
)
from .consensus import (
    ConsensusReport,
    DetectorConfig,
    EstimationBand,
    GroupDeviation,
    RadicalnessReport,
    ReviewerRadicalness,
    build_radicalness_report,
    estimation_bands,
    flag_arbitration,
    group_sd,
    pooled_group_sd,
    rank_groups,
    rank_radicalness,
    reviewer_radicalness,
)
from .workflow import (
    ArbitrationCase,
    Assignment,
    CourseEngine,
    FinalizeResult,
    Override,
    RosterEntry,
    Submission,
    Task,
    TaskState,
    WarningRecord,
)
from .storage import (
    export_scores,
    import_class,
    load_snapshot,
    restore_engine,
    save_snapshot,
    snapshot_engine,
)
from .simulate import (
    ArchetypeSpec,
    DetectionMetrics,
    SyntheticClass,
    evaluate_detection,
    generate_class,
    run_semester,
    run_simulation,
)

__version__ = "0.1.0"
