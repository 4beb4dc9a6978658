"""Interlaboratory key-comparison analysis.

Reference values (inverse-variance weighted mean), degrees of
equivalence with verdicts, and a seeded Monte Carlo harness that checks
the closed-form expectations of three laboratory-effect models.
"""

from .core import (
    BUDGET_MATCH_RTOL,
    Comparison,
    EffectModel,
    KeyComparisonError,
    LabResult,
    MissingEffectFieldError,
    UncertaintyBudget,
    ValidationError,
    Violation,
    ViolationCode,
    compensated_sum,
    total_variance,
    total_variance_of,
    validate,
)
from .doe import (
    DEFAULT_COVERAGE,
    DoeBilateral,
    DoeReport,
    DoeUnilateral,
    ExpectedDoe,
    NegativeDeviationVarianceError,
    bilateral_doe,
    build_report,
    expected_doe,
    unilateral_doe,
)
from .kcrv import (
    DEFAULT_ALPHA,
    ConsistencyCheck,
    EmptyComparisonError,
    InsufficientLabsError,
    KcrvEstimate,
    NonPositiveVarianceError,
    compute_kcrv,
    consistency_check,
)
from .simulate import (
    CHUNK_SIZE,
    DEFAULT_Z,
    Distribution,
    Predictions,
    SimOutcome,
    SimSpec,
    VerificationCheck,
    VerificationReport,
    analytical_predictions,
    draw_comparison,
    evaluate_checks,
    reference_comparison,
    run_simulation,
    validate_spec,
    verify_model,
)

__version__ = "0.1.0"
