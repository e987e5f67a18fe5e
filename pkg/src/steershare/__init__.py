"""Simulation and closed forms for sharing EPR steering between sequential
pairs of observers who measure a two-qubit state with unsharp Pauli
measurements."""

__version__ = "0.1.0"

from .channel import (
    RoundSchedule,
    SharpnessRule,
    SharpnessTriple,
    bloch_scaling,
    effect_operator,
    luders_side_channel,
    round_channel,
    schedule_expand,
    sqrt_effect,
)
from .closed_form import (
    ClosedFormResult,
    asymptote,
    cf_gamma,
    cf_pure,
    cf_pure_schedule,
    cf_theorem1,
    cf_tilde,
    cf_werner,
    closed_form,
)
from .horizon import (
    NoOracleError,
    RunReport,
    compare_closed_form,
    find_uniform_sharpness,
    run_sequence,
    steering_horizon,
    sweep,
)
from .states import (
    BlochForm,
    InvalidStateError,
    ParameterError,
    StateFamilySpec,
    family_spec,
    from_bloch,
    is_entangled_ppt,
    make_state,
    partial_transpose,
    to_bloch,
    validate_density,
)
from .steering import (
    MeasurementFrame,
    SteeringValue,
    cjwr_f3,
    cjwr_fn,
    correlation_matrix,
    maximize_f3,
    observed_cjwr,
    optimal_frame,
    steering_value,
)
