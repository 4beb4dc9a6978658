"""Domain types and validation for interlaboratory comparison data.

Everything downstream (reference values, degrees of equivalence, the
simulator) works on the immutable types defined here. Validation is
collect-all: one pass reports every violation instead of stopping at
the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "EffectModel",
    "UncertaintyBudget",
    "LabResult",
    "Comparison",
    "KeyComparisonError",
    "MissingEffectFieldError",
    "ValidationError",
    "Violation",
    "ViolationCode",
    "validate",
    "total_variance",
    "total_variance_of",
    "compensated_sum",
    "BUDGET_MATCH_RTOL",
]

# A budget, when present, must reproduce the lab's reported variance to
# this relative tolerance.
BUDGET_MATCH_RTOL = 1e-9


class EffectModel(Enum):
    """Laboratory-effect variant of the measurement model.

    NONE: labs contribute no effect beyond random measurement error.
    RANDOM: each lab adds a zero-mean random offset drawn per measurement.
    SYSTEMATIC: each lab adds a fixed constant offset.

    There is deliberately no default; callers must choose explicitly.
    """

    NONE = "none"
    RANDOM = "random"
    SYSTEMATIC = "systematic"


class KeyComparisonError(Exception):
    """Base class for every error raised by this package."""


class MissingEffectFieldError(KeyComparisonError):
    """A budget lacks the component the chosen effect model requires."""


class ViolationCode(Enum):
    DUPLICATE_LAB_ID = "duplicate_lab_id"
    NON_POSITIVE_UNCERTAINTY = "non_positive_uncertainty"
    BUDGET_MISMATCH = "budget_mismatch"
    MISSING_EFFECT_FIELD = "missing_effect_field"
    NON_FINITE_VALUE = "non_finite_value"
    NEGATIVE_VARIANCE_COMPONENT = "negative_variance_component"
    EMPTY_LAB_ID = "empty_lab_id"
    EMPTY_COMPARISON = "empty_comparison"
    BAD_REPLICATION_COUNT = "bad_replication_count"
    SHARED_TRUE_VALUE_MISMATCH = "shared_true_value_mismatch"
    BAD_LAB_IDS = "bad_lab_ids"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message} [{self.code.value}]"


class ValidationError(KeyComparisonError):
    """Raised by :func:`validate`; carries every violation found."""

    def __init__(self, violations):
        self.violations: tuple[Violation, ...] = tuple(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    def codes(self) -> set[ViolationCode]:
        return {v.code for v in self.violations}


@dataclass(frozen=True)
class UncertaintyBudget:
    """Decomposition of a lab's reported variance into effect components.

    s_Y: standard deviation of the travelling standard's true values.
    u_e: standard uncertainty of the lab's random measurement error.
    s_b: standard deviation of the random lab effect (random model only).
    b:   fixed systematic lab offset (systematic model only).
    """

    s_Y: float
    u_e: float
    s_b: float | None = None
    b: float | None = None

    def total_variance(self, model: EffectModel) -> float:
        """Combined variance of a reported value under ``model``.

        The systematic offset ``b`` shifts the expectation, never the
        variance, so the systematic composition equals the no-effect one.
        """
        if model is EffectModel.RANDOM:
            if self.s_b is None:
                raise MissingEffectFieldError(
                    "random-effect model requires s_b in the budget"
                )
            return self.s_Y**2 + self.s_b**2 + self.u_e**2
        return self.s_Y**2 + self.u_e**2


def total_variance(budget: UncertaintyBudget, model: EffectModel) -> float:
    """Function form of :meth:`UncertaintyBudget.total_variance`."""
    return budget.total_variance(model)


@dataclass(frozen=True)
class LabResult:
    """One laboratory's reported value and standard uncertainty."""

    lab_id: str
    x: float
    u_x: float
    budget: UncertaintyBudget | None = None


@dataclass(frozen=True)
class Comparison:
    """An ordered set of lab results plus the effect model they follow.

    ``Y`` is the nominal true-value expectation; only the simulator and
    the analytical-expectation operations use it.
    """

    results: tuple[LabResult, ...]
    model: EffectModel
    Y: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "results", tuple(self.results))

    @property
    def lab_ids(self) -> tuple[str, ...]:
        return tuple(r.lab_id for r in self.results)

    @property
    def n_labs(self) -> int:
        return len(self.results)


def total_variance_of(result: LabResult, model: EffectModel) -> float:
    """Total variance used for weighting: budget composition if present,
    otherwise the reported uncertainty squared."""
    if result.budget is not None:
        return result.budget.total_variance(model)
    return result.u_x * result.u_x


def compensated_sum(values) -> float:
    """Neumaier-compensated summation, deterministic in input order."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def _check_budget(v: list, lab: LabResult, model: EffectModel, where: str) -> None:
    budget = lab.budget
    components = [("s_Y", budget.s_Y), ("u_e", budget.u_e)]
    if budget.s_b is not None:
        components.append(("s_b", budget.s_b))
    for name, value in components:
        if not math.isfinite(value):
            v.append(Violation(ViolationCode.NON_FINITE_VALUE, where, f"{name} is not finite"))
        elif value < 0:
            v.append(
                Violation(
                    ViolationCode.NEGATIVE_VARIANCE_COMPONENT,
                    where,
                    f"{name} = {value} is negative",
                )
            )
    if budget.b is not None and not math.isfinite(budget.b):
        v.append(Violation(ViolationCode.NON_FINITE_VALUE, where, "b is not finite"))

    missing = None
    if model is EffectModel.RANDOM and budget.s_b is None:
        missing = "s_b"
    elif model is EffectModel.SYSTEMATIC and budget.b is None:
        missing = "b"
    if missing is not None:
        v.append(
            Violation(
                ViolationCode.MISSING_EFFECT_FIELD,
                where,
                f"model {model.value!r} requires budget field {missing!r}",
            )
        )
        return

    # Budget must reproduce the reported variance (relative tolerance).
    if any(viol.where == where and viol.code is ViolationCode.NON_FINITE_VALUE for viol in v):
        return
    if math.isfinite(lab.u_x) and lab.u_x > 0:
        tv = budget.total_variance(model)
        if not math.isclose(tv, lab.u_x**2, rel_tol=BUDGET_MATCH_RTOL, abs_tol=0.0):
            v.append(
                Violation(
                    ViolationCode.BUDGET_MISMATCH,
                    where,
                    f"budget total variance {tv!r} != u_x^2 {lab.u_x**2!r}",
                )
            )


def validate(comparison: Comparison) -> Comparison:
    """Check every type invariant; raise :class:`ValidationError` listing
    all violations found, or return the comparison unchanged.

    Idempotent: the returned object is the input object.
    """
    violations: list[Violation] = []

    if comparison.n_labs == 0:
        violations.append(
            Violation(ViolationCode.EMPTY_COMPARISON, "comparison", "no lab results")
        )

    seen: dict[str, int] = {}
    for r in comparison.results:
        seen[r.lab_id] = seen.get(r.lab_id, 0) + 1
    for lab_id, count in seen.items():
        if count > 1:
            violations.append(
                Violation(
                    ViolationCode.DUPLICATE_LAB_ID,
                    "comparison",
                    f"lab {lab_id!r} appears {count} times",
                )
            )

    for idx, lab in enumerate(comparison.results):
        where = f"lab {lab.lab_id!r}" if lab.lab_id else f"lab #{idx + 1}"
        if not lab.lab_id:
            violations.append(
                Violation(ViolationCode.EMPTY_LAB_ID, where, "empty lab identifier")
            )
        if not math.isfinite(lab.x):
            violations.append(
                Violation(ViolationCode.NON_FINITE_VALUE, where, f"x = {lab.x} is not finite")
            )
        if not math.isfinite(lab.u_x):
            violations.append(
                Violation(ViolationCode.NON_FINITE_VALUE, where, f"u_x = {lab.u_x} is not finite")
            )
        elif lab.u_x <= 0:
            violations.append(
                Violation(
                    ViolationCode.NON_POSITIVE_UNCERTAINTY,
                    where,
                    f"u_x = {lab.u_x} must be > 0",
                )
            )
        if lab.budget is not None:
            _check_budget(violations, lab, comparison.model, where)

    if violations:
        raise ValidationError(violations)
    return comparison
