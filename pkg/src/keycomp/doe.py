"""Degrees of equivalence: deviations, uncertainties, and verdicts.

Unilateral entries compare each lab against the reference value; the
bilateral matrix compares every pair directly. ``expected_doe`` gives the
closed-form expectations of both under each effect model: identically
zero for the no-effect and random-effect models, and offset-driven for
the systematic model.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .core import (
    Comparison,
    EffectModel,
    KeyComparisonError,
    MissingEffectFieldError,
    compensated_sum,
)
from .kcrv import (
    ConsistencyCheck,
    KcrvEstimate,
    NonPositiveVarianceError,
    compute_kcrv,
    consistency_check,
)
from .core import total_variance_of

__all__ = [
    "DoeUnilateral",
    "DoeBilateral",
    "DoeReport",
    "ExpectedDoe",
    "NegativeDeviationVarianceError",
    "unilateral_doe",
    "bilateral_doe",
    "expected_doe",
    "build_report",
    "DEFAULT_COVERAGE",
]

DEFAULT_COVERAGE = 2.0


class NegativeDeviationVarianceError(KeyComparisonError):
    """u^2(x_i) - u^2(x_K) came out negative: the estimate was not
    computed from this comparison."""


@dataclass(frozen=True)
class DoeUnilateral:
    lab_id: str
    d: float
    u_d: float
    U_d: float
    k: float
    equivalent: bool


@dataclass(frozen=True)
class DoeBilateral:
    lab_i: str
    lab_j: str
    d_ij: float
    u_dij: float
    U_dij: float
    equivalent: bool


@dataclass(frozen=True)
class DoeReport:
    """Unilateral entries plus the full N x N bilateral matrix."""

    kcrv: KcrvEstimate
    unilateral: tuple[DoeUnilateral, ...]
    bilateral: tuple[tuple[DoeBilateral, ...], ...]
    consistency: ConsistencyCheck | None = None


@dataclass(frozen=True)
class ExpectedDoe:
    """Model expectations of the deviations (exact zeros where the model
    says so, not small floats)."""

    lab_ids: tuple[str, ...]
    d: tuple[float, ...]
    d_matrix: tuple[tuple[float, ...], ...]


def _check_same_origin(comparison: Comparison, kcrv: KcrvEstimate) -> None:
    if kcrv.lab_ids != comparison.lab_ids or kcrv.model is not comparison.model:
        raise ValueError("kcrv estimate does not belong to this comparison")


def unilateral_doe(
    comparison: Comparison,
    kcrv: KcrvEstimate,
    k: float = DEFAULT_COVERAGE,
    excluded_from_kcrv: bool = False,
) -> tuple[DoeUnilateral, ...]:
    """Per-lab deviation from the reference value with its uncertainty.

    d = x_i - x_K and u^2(d) = u^2(x_i) - u^2(x_K) for labs included in
    the reference value. With ``excluded_from_kcrv`` the variances add
    instead of subtracting (for a lab kept out of the weighted mean).
    A lab is equivalent when |d| <= k * u(d); the boundary counts.
    """
    _check_same_origin(comparison, kcrv)
    u2k = kcrv.u_xK**2
    entries = []
    for r in comparison.results:
        v = total_variance_of(r, comparison.model)
        if excluded_from_kcrv:
            rad = v + u2k
        else:
            rad = v - u2k
            if rad < 0.0:
                # Tolerate rounding at the last ulp; anything larger means
                # the estimate and comparison do not match.
                if rad >= -8.0 * sys.float_info.epsilon * max(v, u2k):
                    rad = 0.0
                else:
                    raise NegativeDeviationVarianceError(
                        f"lab {r.lab_id!r}: u^2(x_i) - u^2(x_K) = {rad} < 0"
                    )
        d = r.x - kcrv.x_K
        u_d = math.sqrt(rad)
        big_u = k * u_d
        entries.append(
            DoeUnilateral(
                lab_id=r.lab_id,
                d=d,
                u_d=u_d,
                U_d=big_u,
                k=k,
                equivalent=abs(d) <= big_u,
            )
        )
    return tuple(entries)


def bilateral_doe(
    comparison: Comparison,
    k: float = DEFAULT_COVERAGE,
) -> tuple[tuple[DoeBilateral, ...], ...]:
    """Full N x N matrix of pairwise deviations.

    d_ij = x_i - x_j and u^2(d_ij) = u^2(x_i) + u^2(x_j); the diagonal
    carries d_ii = 0 with u(d_ii) = sqrt(2) * u(x_i). Antisymmetry in d
    and symmetry in u hold exactly.
    """
    results = comparison.results
    variances = [total_variance_of(r, comparison.model) for r in results]
    matrix = []
    for i, ri in enumerate(results):
        row = []
        for j, rj in enumerate(results):
            d = ri.x - rj.x
            u = math.sqrt(variances[i] + variances[j])
            big_u = k * u
            row.append(
                DoeBilateral(
                    lab_i=ri.lab_id,
                    lab_j=rj.lab_id,
                    d_ij=d,
                    u_dij=u,
                    U_dij=big_u,
                    equivalent=abs(d) <= big_u,
                )
            )
        matrix.append(tuple(row))
    return tuple(matrix)


def expected_doe(comparison: Comparison) -> ExpectedDoe:
    """Closed-form expectations of d_i and d_ij under the chosen model.

    No-effect and random-effect models: all expectations are exactly zero.
    Systematic model: E(d_i) = b_i - sum_j(w_j b_j) / sum_j(w_j) with
    w_j = 1 / (s_Y_j^2 + u_e_j^2), and E(d_ij) = b_i - b_j.

    Every lab needs a budget; the systematic model additionally needs b.
    """
    n = comparison.n_labs
    lab_ids = comparison.lab_ids
    for r in comparison.results:
        if r.budget is None:
            raise MissingEffectFieldError(
                f"lab {r.lab_id!r}: expected_doe needs an uncertainty budget"
            )

    if comparison.model is not EffectModel.SYSTEMATIC:
        zeros = tuple(0.0 for _ in range(n))
        zero_matrix = tuple(zeros for _ in range(n))
        return ExpectedDoe(lab_ids=lab_ids, d=zeros, d_matrix=zero_matrix)

    bs = []
    for r in comparison.results:
        if r.budget.b is None:
            raise MissingEffectFieldError(
                f"lab {r.lab_id!r}: systematic model requires budget field 'b'"
            )
        bs.append(r.budget.b)

    variances = [r.budget.s_Y**2 + r.budget.u_e**2 for r in comparison.results]
    if all(v == 0.0 for v in variances):
        weights = [1.0 / n] * n
    else:
        if any(not math.isfinite(v) or v <= 0.0 for v in variances):
            raise NonPositiveVarianceError(
                "expected_doe needs strictly positive budget variances"
            )
        weights = [1.0 / v for v in variances]

    mean_b = compensated_sum(w * b for w, b in zip(weights, bs)) / compensated_sum(weights)
    e_d = tuple(b - mean_b for b in bs)
    e_matrix = tuple(tuple(bi - bj for bj in bs) for bi in bs)
    return ExpectedDoe(lab_ids=lab_ids, d=e_d, d_matrix=e_matrix)


def build_report(
    comparison: Comparison,
    k: float = DEFAULT_COVERAGE,
    alpha: float | None = None,
) -> DoeReport:
    """Compose reference value, both degree-of-equivalence views, and
    (when ``alpha`` is given and N >= 2) the consistency check."""
    kcrv = compute_kcrv(comparison)
    unilateral = unilateral_doe(comparison, kcrv, k=k)
    bilateral = bilateral_doe(comparison, k=k)
    consistency = None
    if alpha is not None and comparison.n_labs >= 2:
        consistency = consistency_check(comparison, kcrv, alpha=alpha)
    return DoeReport(
        kcrv=kcrv,
        unilateral=unilateral,
        bilateral=bilateral,
        consistency=consistency,
    )
