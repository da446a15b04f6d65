"""Two-qubit knowledge excesses, the Bell-factor bound, and a coincidence-counting simulator."""

__version__ = "0.1.0"

from .core import (
    BlochForm,
    ConditionalDecomposition,
    QubitMeasurement,
    TwoQubitState,
    apply_local_unitary,
    are_complementary,
    conditional_decompose,
    decompose,
    measurement_from_polarization_angle,
    recompose,
    rotation_from_quaternion,
    rotation_of_unitary,
    unitary_from_rotation,
    validate_state,
)
from .errors import (
    BellboundError,
    EmptyRecord,
    NoConvergence,
    NotAProbabilityVector,
    NotComplementary,
    NotHermitian,
    NotPositive,
    NotRotation,
    NotUnitary,
    OutOfRange,
    SingularReduction,
    StateValidationError,
    TraceNotOne,
)
from .factories import WernerPrediction, bell_diagonal, random_state, werner, werner_prediction
from .knowledge import (
    BoundCheck,
    ExcessOptimum,
    KnowledgeReport,
    apriori,
    bell_max,
    check_bound,
    check_same_meter_bound,
    distinguishability,
    distinguishability_excess,
    knowledge,
    knowledge_excess,
    knowledge_report,
    optimal_meter,
    optimize_excess_sum,
)
from .canonical import CanonicalForm, FilterResult, canonical_form, filter_normal_form, saturate_after_filter
from .expsim import (
    BELL_ANGLE_PAIRS,
    CountRecord,
    ExperimentConfig,
    MixingModel,
    SweepPoint,
    bell_estimate_stderr,
    coincidence_probs,
    estimate_apriori,
    estimate_bell_max,
    estimate_correlation,
    estimate_knowledge,
    exact_counts,
    mixed_state_from_model,
    mixing_model_from_schedule,
    run_sweep_experiment,
    signal_measurement,
    simulate_bell_records,
    simulate_counts,
    werner_mixing_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
