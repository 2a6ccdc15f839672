from .fields import CoefficientField, FieldEvaluationError
from .system import (
    DeclaredBounds,
    PHSystem,
    ResolvedBounds,
    SampleGrid,
    build_system,
    default_sample_grid,
)
from .validation import (
    ValidationReport,
    boundary_dissipation_kappa,
    h_weighted_kappa,
    kernel_basis,
    trace_projector,
    validate,
)
from .presets import (
    build_preset,
    preset_counterexample,
    preset_string,
    preset_timoshenko,
)
