"""Reference value of a comparison: inverse-variance weighted mean.

The reference value x_K weights each lab by the reciprocal of its total
variance, and its uncertainty is the square root of the reciprocal of the
summed weights. A chi-squared compatibility check of residuals against
stated uncertainties is included as supporting machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import chi2 as _chi2_dist

from .core import (
    Comparison,
    EffectModel,
    KeyComparisonError,
    compensated_sum,
    total_variance_of,
)

__all__ = [
    "KcrvEstimate",
    "ConsistencyCheck",
    "EmptyComparisonError",
    "NonPositiveVarianceError",
    "InsufficientLabsError",
    "compute_kcrv",
    "consistency_check",
    "DEFAULT_ALPHA",
]

DEFAULT_ALPHA = 0.05


class EmptyComparisonError(KeyComparisonError):
    """The comparison contains no lab results."""


class NonPositiveVarianceError(KeyComparisonError):
    """A lab's total variance is zero, negative, or not finite."""


class InsufficientLabsError(KeyComparisonError):
    """The operation needs more participants than the comparison has."""


@dataclass(frozen=True)
class KcrvEstimate:
    """Reference value, its standard uncertainty, and the normalized
    per-lab weights that produced them (aligned with ``lab_ids``)."""

    x_K: float
    u_xK: float
    weights: tuple[float, ...]
    lab_ids: tuple[str, ...]
    model: EffectModel


@dataclass(frozen=True)
class ConsistencyCheck:
    chi2_obs: float
    dof: int
    p_value: float
    passed: bool
    alpha: float


def _variances(comparison: Comparison) -> list[float]:
    return [total_variance_of(r, comparison.model) for r in comparison.results]


def compute_kcrv(comparison: Comparison) -> KcrvEstimate:
    """Inverse-variance weighted mean of the reported values.

    Weights are 1/v_i with v_i the model-specific total variance of lab i
    (taken from the budget when present, else u_x squared). Accumulation
    is compensated and runs in input order, so results are reproducible
    bit-for-bit regardless of call context.

    A comparison in which *every* lab has exactly zero total variance is
    treated as the equal-weights limit (x_K = plain mean, u_xK = 0); this
    keeps degenerate simulator output usable. Negative, non-finite, or
    mixed zero/positive variances raise :class:`NonPositiveVarianceError`.
    """
    results = comparison.results
    if len(results) == 0:
        raise EmptyComparisonError("comparison has no lab results")

    xs = [r.x for r in results]
    variances = _variances(comparison)
    n = len(results)

    if all(v == 0.0 for v in variances):
        weights = tuple(1.0 / n for _ in range(n))
        x_k = compensated_sum(xs) / n
        u = 0.0
    else:
        if any(not math.isfinite(v) or v <= 0.0 for v in variances):
            bad = [r.lab_id for r, v in zip(results, variances) if not (math.isfinite(v) and v > 0.0)]
            raise NonPositiveVarianceError(
                f"non-positive total variance for labs: {', '.join(bad)}"
            )
        inv = [1.0 / v for v in variances]
        s = compensated_sum(inv)
        t = compensated_sum(x * iv for x, iv in zip(xs, inv))
        x_k = t / s
        u = math.sqrt(1.0 / s)
        # Guard the documented invariants against last-ulp rounding.
        u = min(u, min(math.sqrt(v) for v in variances), min(r.u_x for r in results))
        weights = tuple(iv / s for iv in inv)

    x_k = min(max(x_k, min(xs)), max(xs))
    return KcrvEstimate(
        x_K=x_k,
        u_xK=u,
        weights=weights,
        lab_ids=comparison.lab_ids,
        model=comparison.model,
    )


def consistency_check(
    comparison: Comparison,
    kcrv: KcrvEstimate,
    alpha: float = DEFAULT_ALPHA,
) -> ConsistencyCheck:
    """Chi-squared test of residual compatibility with stated uncertainties.

    chi2_obs = sum (x_i - x_K)^2 / v_i with N - 1 degrees of freedom;
    the comparison passes when the upper-tail probability is >= alpha.
    """
    n = comparison.n_labs
    if n < 2:
        raise InsufficientLabsError(f"consistency check needs N >= 2, got N = {n}")
    variances = _variances(comparison)
    if any(not math.isfinite(v) or v <= 0.0 for v in variances):
        raise NonPositiveVarianceError("consistency check needs strictly positive variances")

    chi2_obs = compensated_sum(
        (r.x - kcrv.x_K) ** 2 / v for r, v in zip(comparison.results, variances)
    )
    dof = n - 1
    p_value = float(_chi2_dist.sf(chi2_obs, dof))
    return ConsistencyCheck(
        chi2_obs=chi2_obs,
        dof=dof,
        p_value=p_value,
        passed=p_value >= alpha,
        alpha=alpha,
    )
