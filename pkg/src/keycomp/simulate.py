"""Seeded Monte Carlo generation of comparisons and verification of the
analytical expectations.

Replications are drawn from a counter-based generator (Philox) in fixed
chunks of :data:`CHUNK_SIZE`; the values of replication ``i`` are a pure
function of ``(seed, i)``, so serial and parallel runs agree bit-for-bit
and any single replication can be reproduced in isolation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    Comparison,
    EffectModel,
    LabResult,
    UncertaintyBudget,
    ValidationError,
    Violation,
    ViolationCode,
)
from .doe import expected_doe
from .kcrv import compute_kcrv

__all__ = [
    "Distribution",
    "SimSpec",
    "SimOutcome",
    "Predictions",
    "VerificationCheck",
    "VerificationReport",
    "validate_spec",
    "draw_comparison",
    "run_simulation",
    "analytical_predictions",
    "evaluate_checks",
    "verify_model",
    "reference_comparison",
    "CHUNK_SIZE",
    "DEFAULT_Z",
]

# Replications are drawn in fixed chunks; changing this constant changes
# the realized random stream (bit-reproducibility holds per chunk size).
CHUNK_SIZE = 4096

DEFAULT_Z = 4.0


class Distribution(Enum):
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class SimSpec:
    """Recipe for synthetic comparisons.

    ``shared_true_value`` decides whether one true-value draw per
    replication is shared by all labs (a single travelling standard) or
    each lab sees an independent draw. Expectations are identical either
    way; variances of the reference value differ.
    """

    Y: float
    budgets: tuple[UncertaintyBudget, ...]
    model: EffectModel
    n_reps: int
    seed: int
    shared_true_value: bool = True
    distribution: Distribution = Distribution.GAUSSIAN
    lab_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(self.budgets))
        if self.lab_ids is not None:
            object.__setattr__(self, "lab_ids", tuple(self.lab_ids))

    def resolved_lab_ids(self) -> tuple[str, ...]:
        if self.lab_ids is not None:
            return self.lab_ids
        return tuple(f"lab{i + 1}" for i in range(len(self.budgets)))


@dataclass(frozen=True)
class SimOutcome:
    """Empirical moments across replications.

    Matrices are indexed like ``lab_ids``; ``var_*`` are sample variances
    (ddof 1), reported as 0 when there is a single replication.
    """

    lab_ids: tuple[str, ...]
    model: EffectModel
    n_reps: int
    seed: int
    mean_xK: float
    var_xK: float
    mean_d: tuple[float, ...]
    var_d: tuple[float, ...]
    mean_dij: tuple[tuple[float, ...], ...]
    var_dij: tuple[tuple[float, ...], ...]
    cov_x_xK: tuple[float, ...]
    var_x: tuple[float, ...]


def validate_spec(spec: SimSpec) -> SimSpec:
    """Collect-all validation of a simulation recipe."""
    v: list[Violation] = []
    if len(spec.budgets) == 0:
        v.append(Violation(ViolationCode.EMPTY_COMPARISON, "spec", "no lab budgets"))
    if not isinstance(spec.n_reps, int) or isinstance(spec.n_reps, bool) or spec.n_reps < 1:
        v.append(
            Violation(
                ViolationCode.BAD_REPLICATION_COUNT,
                "spec",
                f"n_reps must be an integer >= 1, got {spec.n_reps!r}",
            )
        )
    if not math.isfinite(spec.Y):
        v.append(Violation(ViolationCode.NON_FINITE_VALUE, "spec", f"Y = {spec.Y} is not finite"))

    lab_ids = spec.resolved_lab_ids()
    if len(lab_ids) != len(spec.budgets):
        v.append(
            Violation(
                ViolationCode.BAD_LAB_IDS,
                "spec",
                f"{len(lab_ids)} lab ids for {len(spec.budgets)} budgets",
            )
        )
    else:
        seen: set[str] = set()
        for lid in lab_ids:
            if not lid:
                v.append(Violation(ViolationCode.EMPTY_LAB_ID, "spec", "empty lab identifier"))
            elif lid in seen:
                v.append(
                    Violation(ViolationCode.DUPLICATE_LAB_ID, "spec", f"lab {lid!r} repeated")
                )
            seen.add(lid)

    for idx, budget in enumerate(spec.budgets):
        where = f"budget #{idx + 1}"
        for name, value in (("s_Y", budget.s_Y), ("u_e", budget.u_e), ("s_b", budget.s_b), ("b", budget.b)):
            if value is None:
                continue
            if not math.isfinite(value):
                v.append(Violation(ViolationCode.NON_FINITE_VALUE, where, f"{name} is not finite"))
            elif name != "b" and value < 0:
                v.append(
                    Violation(
                        ViolationCode.NEGATIVE_VARIANCE_COMPONENT,
                        where,
                        f"{name} = {value} is negative",
                    )
                )
        if spec.model is EffectModel.RANDOM and budget.s_b is None:
            v.append(
                Violation(ViolationCode.MISSING_EFFECT_FIELD, where, "random model requires s_b")
            )
        if spec.model is EffectModel.SYSTEMATIC and budget.b is None:
            v.append(
                Violation(ViolationCode.MISSING_EFFECT_FIELD, where, "systematic model requires b")
            )

    if spec.shared_true_value and len(spec.budgets) > 1:
        s_ys = {budget.s_Y for budget in spec.budgets}
        if len(s_ys) > 1:
            v.append(
                Violation(
                    ViolationCode.SHARED_TRUE_VALUE_MISMATCH,
                    "spec",
                    f"shared true value requires one common s_Y, got {sorted(s_ys)}",
                )
            )

    if v:
        raise ValidationError(v)
    return spec


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.Philox(seq))


def _draw_chunk(spec: SimSpec, chunk_index: int, rows: int) -> np.ndarray:
    """Measured values for replications [chunk*CHUNK_SIZE, ...): (rows, N).

    Draw layout per row is fixed -- true-value draws, then random lab
    effects (random model only), then measurement errors -- so any prefix
    of a chunk reproduces the same replications.
    """
    n = len(spec.budgets)
    s_y = np.array([budget.s_Y for budget in spec.budgets])
    u_e = np.array([budget.u_e for budget in spec.budgets])

    n_y = 1 if spec.shared_true_value else n
    n_b = n if spec.model is EffectModel.RANDOM else 0
    z = _chunk_rng(spec.seed, chunk_index).standard_normal((rows, n_y + n_b + n))

    if spec.shared_true_value:
        true_vals = spec.Y + s_y[0] * z[:, :1]
    else:
        true_vals = spec.Y + s_y * z[:, :n]

    errors = u_e * z[:, n_y + n_b :]
    if spec.model is EffectModel.RANDOM:
        s_b = np.array([budget.s_b for budget in spec.budgets])
        effects = s_b * z[:, n_y : n_y + n_b]
    elif spec.model is EffectModel.SYSTEMATIC:
        effects = np.array([budget.b for budget in spec.budgets])
    else:
        effects = 0.0

    return true_vals + effects + errors


def draw_comparison(spec: SimSpec, rep_index: int) -> Comparison:
    """The comparison of replication ``rep_index``; pure in (seed, index)."""
    validate_spec(spec)
    if not 0 <= rep_index < spec.n_reps:
        raise IndexError(f"rep_index {rep_index} outside [0, {spec.n_reps})")
    chunk, row = divmod(rep_index, CHUNK_SIZE)
    values = _draw_chunk(spec, chunk, row + 1)[row]
    results = []
    for lab_id, budget, x in zip(spec.resolved_lab_ids(), spec.budgets, values):
        u_x = math.sqrt(budget.total_variance(spec.model))
        results.append(LabResult(lab_id=lab_id, x=float(x), u_x=u_x, budget=budget))
    return Comparison(results=tuple(results), model=spec.model, Y=spec.Y)


def _kcrv_weights(spec: SimSpec) -> tuple[np.ndarray, float]:
    """Normalized inverse-variance weights and u^2(x_K) for the spec's
    budgets (equal-weights limit when all variances are zero)."""
    variances = np.array([budget.total_variance(spec.model) for budget in spec.budgets])
    n = len(variances)
    if np.all(variances == 0.0):
        return np.full(n, 1.0 / n), 0.0
    if np.any(variances <= 0.0):
        raise ValidationError(
            [
                Violation(
                    ViolationCode.NEGATIVE_VARIANCE_COMPONENT,
                    "spec",
                    "mixed zero/positive total variances",
                )
            ]
        )
    inv = 1.0 / variances
    total = inv.sum()
    w = inv / total
    return w / w.sum(), 1.0 / total


def _accumulate_chunk(spec: SimSpec, w: np.ndarray, chunk_index: int, rows: int):
    x = _draw_chunk(spec, chunk_index, rows)
    xc = x - spec.Y  # center to keep second moments well conditioned
    xk = xc @ w
    d = xc - xk[:, None]
    pair = xc[:, :, None] - xc[:, None, :]
    return (
        xk.sum(),
        (xk * xk).sum(),
        d.sum(axis=0),
        (d * d).sum(axis=0),
        pair.sum(axis=0),
        (pair * pair).sum(axis=0),
        xc.sum(axis=0),
        (xc * xc).sum(axis=0),
        (xc * xk[:, None]).sum(axis=0),
    )


def run_simulation(spec: SimSpec, threads: int = 1) -> SimOutcome:
    """Draw ``n_reps`` comparisons, compute the reference value and the
    deviations for each, and reduce their moments.

    Chunks may be evaluated concurrently but are always reduced in chunk
    order, so the outcome is independent of ``threads``.
    """
    validate_spec(spec)
    n = spec.n_reps
    w, _ = _kcrv_weights(spec)

    chunks = [
        (c, min(CHUNK_SIZE, n - c * CHUNK_SIZE))
        for c in range((n + CHUNK_SIZE - 1) // CHUNK_SIZE)
    ]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(
                pool.map(lambda cr: _accumulate_chunk(spec, w, cr[0], cr[1]), chunks)
            )
    else:
        partials = [_accumulate_chunk(spec, w, c, rows) for c, rows in chunks]

    sums = [sum(p[0] for p in partials), sum(p[1] for p in partials)]
    arrays = [np.sum([p[i] for p in partials], axis=0) for i in range(2, 9)]
    sum_xk, sum_xk2 = sums
    sum_d, sum_d2, sum_pair, sum_pair2, sum_x, sum_x2, sum_x_xk = arrays

    def _var(sum_sq, sum_lin):
        if n < 2:
            return sum_sq * 0.0
        return (sum_sq - sum_lin * sum_lin / n) / (n - 1)

    mean_xk = sum_xk / n
    var_xk = _var(sum_xk2, sum_xk)
    mean_d = sum_d / n
    var_d = np.maximum(_var(sum_d2, sum_d), 0.0)
    mean_pair = sum_pair / n
    var_pair = np.maximum(_var(sum_pair2, sum_pair), 0.0)
    var_x = np.maximum(_var(sum_x2, sum_x), 0.0)
    if n < 2:
        cov = np.zeros_like(sum_x)
    else:
        cov = (sum_x_xk - sum_x * sum_xk / n) / (n - 1)

    def _mat(a: np.ndarray) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(float(v) for v in row) for row in a)

    return SimOutcome(
        lab_ids=spec.resolved_lab_ids(),
        model=spec.model,
        n_reps=n,
        seed=spec.seed,
        mean_xK=float(spec.Y + mean_xk),
        var_xK=float(max(var_xk, 0.0)),
        mean_d=tuple(float(v) for v in mean_d),
        var_d=tuple(float(v) for v in var_d),
        mean_dij=_mat(mean_pair),
        var_dij=_mat(var_pair),
        cov_x_xK=tuple(float(v) for v in cov),
        var_x=tuple(float(v) for v in var_x),
    )


def reference_comparison(spec: SimSpec) -> Comparison:
    """A comparison holding the spec's budgets with placeholder values;
    enough for every analytical prediction (none of them depend on x)."""
    results = []
    for lab_id, budget in zip(spec.resolved_lab_ids(), spec.budgets):
        u_x = math.sqrt(budget.total_variance(spec.model))
        results.append(LabResult(lab_id=lab_id, x=spec.Y, u_x=u_x, budget=budget))
    return Comparison(results=tuple(results), model=spec.model, Y=spec.Y)


@dataclass(frozen=True)
class Predictions:
    """Analytical moments the simulation is checked against."""

    lab_ids: tuple[str, ...]
    mean_d: tuple[float, ...]
    mean_dij: tuple[tuple[float, ...], ...]
    var_xK: float
    var_d: tuple[float, ...]
    cov_x_xK: tuple[float, ...]


def analytical_predictions(spec: SimSpec) -> Predictions:
    """Closed-form expectations: deviation means from the effect model,
    var(x_K) = cov(x_i, x_K) = u^2(x_K), and var(d_i) = u^2(x_i) - u^2(x_K)."""
    validate_spec(spec)
    comparison = reference_comparison(spec)
    kcrv = compute_kcrv(comparison)
    expected = expected_doe(comparison)
    u2k = kcrv.u_xK**2
    variances = [budget.total_variance(spec.model) for budget in spec.budgets]
    var_d = tuple(max(v - u2k, 0.0) for v in variances)
    return Predictions(
        lab_ids=spec.resolved_lab_ids(),
        mean_d=expected.d,
        mean_dij=expected.d_matrix,
        var_xK=u2k,
        var_d=var_d,
        cov_x_xK=tuple(u2k for _ in variances),
    )


@dataclass(frozen=True)
class VerificationCheck:
    claim: str
    subject: str
    observed: float
    predicted: float
    se: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[VerificationCheck, ...]
    n_reps: int
    seed: int
    z: float
    passed: bool


def evaluate_checks(
    outcome: SimOutcome,
    predictions: Predictions,
    z: float = DEFAULT_Z,
) -> tuple[VerificationCheck, ...]:
    """Compare observed moments against predictions, each within ``z``
    standard errors. Pure: callable with doctored predictions to confirm
    the harness can fail."""
    n = outcome.n_reps
    labs = outcome.lab_ids
    checks: list[VerificationCheck] = []

    def add(claim: str, subject: str, observed: float, predicted: float, se: float):
        checks.append(
            VerificationCheck(
                claim=claim,
                subject=subject,
                observed=observed,
                predicted=predicted,
                se=se,
                passed=abs(observed - predicted) <= z * se,
            )
        )

    for i, lab in enumerate(labs):
        add("mean_d", lab, outcome.mean_d[i], predictions.mean_d[i], math.sqrt(outcome.var_d[i] / n))
    for i in range(len(labs)):
        for j in range(i + 1, len(labs)):
            add(
                "mean_dij",
                f"{labs[i]}|{labs[j]}",
                outcome.mean_dij[i][j],
                predictions.mean_dij[i][j],
                math.sqrt(outcome.var_dij[i][j] / n),
            )
    spread = math.sqrt(2.0 / (n - 1)) if n > 1 else 0.0
    add("var_xK", "", outcome.var_xK, predictions.var_xK, outcome.var_xK * spread)
    for i, lab in enumerate(labs):
        add("var_d", lab, outcome.var_d[i], predictions.var_d[i], outcome.var_d[i] * spread)
    for i, lab in enumerate(labs):
        se = (
            math.sqrt(
                max(outcome.var_x[i] * outcome.var_xK + outcome.cov_x_xK[i] ** 2, 0.0)
                / (n - 1)
            )
            if n > 1
            else 0.0
        )
        add("cov_x_xK", lab, outcome.cov_x_xK[i], predictions.cov_x_xK[i], se)
    return tuple(checks)


def verify_model(spec: SimSpec, z: float = DEFAULT_Z, threads: int = 1) -> VerificationReport:
    """Run the simulation and test every analytical claim against it."""
    validate_spec(spec)
    if spec.n_reps < 2:
        raise ValidationError(
            [
                Violation(
                    ViolationCode.BAD_REPLICATION_COUNT,
                    "spec",
                    "verification needs n_reps >= 2 for finite standard errors",
                )
            ]
        )
    outcome = run_simulation(spec, threads=threads)
    predictions = analytical_predictions(spec)
    checks = evaluate_checks(outcome, predictions, z=z)
    return VerificationReport(
        checks=checks,
        n_reps=spec.n_reps,
        seed=spec.seed,
        z=z,
        passed=all(c.passed for c in checks),
    )
