"""File ingestion and report rendering.

Comparison data comes in as CSV (``lab_id,x,u_x[,s_Y,u_e,s_b,b]``) or
JSON (schema version 1); reports go out as lossless JSON, plot-ready
CSV, or Markdown tables. Parsing arbitrary bytes never raises anything
other than :class:`ParseError` subclasses or
:class:`~keycomp.core.ValidationError`.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
from enum import Enum

from .core import (
    Comparison,
    EffectModel,
    KeyComparisonError,
    LabResult,
    UncertaintyBudget,
    ValidationError,
    Violation,
    validate,
)
from .doe import DoeBilateral, DoeReport, DoeUnilateral
from .kcrv import ConsistencyCheck, KcrvEstimate
from .simulate import (
    Distribution,
    SimOutcome,
    SimSpec,
    VerificationCheck,
    VerificationReport,
    validate_spec,
)

__all__ = [
    "FileFormat",
    "ReportFormat",
    "ParseError",
    "MalformedHeaderError",
    "MalformedRowError",
    "BadNumberError",
    "SchemaVersionError",
    "SCHEMA_VERSION",
    "parse_comparison",
    "emit_comparison",
    "parse_sim_spec",
    "emit_sim_spec",
    "emit_report",
    "parse_report",
    "TABLE_DIGITS",
]

SCHEMA_VERSION = 1
TABLE_DIGITS = 6

_CSV_CORE = ["lab_id", "x", "u_x"]
_CSV_FULL = _CSV_CORE + ["s_Y", "u_e", "s_b", "b"]


class FileFormat(Enum):
    CSV = "csv"
    JSON = "json"


class ReportFormat(Enum):
    JSON = "json"
    CSV = "csv"
    MARKDOWN = "md"


class ParseError(KeyComparisonError):
    """Input bytes could not be interpreted under the schema."""


class MalformedHeaderError(ParseError):
    pass


class MalformedRowError(ParseError):
    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(f"row {row}: {message}")


class BadNumberError(ParseError):
    def __init__(self, row: int, col: str, value):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col!r}: not a number: {value!r}")


class SchemaVersionError(ParseError):
    pass


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from None


def _load_json(text: str) -> object:
    try:
        return json.loads(text)
    except (json.JSONDecodeError, RecursionError, ValueError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from None


def _as_number(value, row: int, col: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise BadNumberError(row, col, value)
    return float(value)


def _as_opt_number(value, row: int, col: str) -> float | None:
    if value is None:
        return None
    return _as_number(value, row, col)


def _check_schema_version(obj: dict) -> None:
    version = obj.get("schema_version")
    if version is None:
        raise SchemaVersionError("missing schema_version")
    if isinstance(version, bool) or version != SCHEMA_VERSION:
        raise SchemaVersionError(f"unsupported schema_version: {version!r}")


def _parse_model(value, fallback: EffectModel | None) -> EffectModel:
    if fallback is not None:
        return fallback
    if not isinstance(value, str):
        raise ParseError(f"model must be one of none/random/systematic, got {value!r}")
    try:
        return EffectModel(value)
    except ValueError:
        raise ParseError(f"unknown model {value!r}") from None


def _float_cell(cell: str, row: int, col: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise BadNumberError(row, col, cell) from None


def _parse_csv_comparison(text: str, model: EffectModel | None) -> Comparison:
    if model is None:
        raise ParseError("CSV input requires an explicit effect model")
    try:
        rows = [r for r in csv.reader(_stdio.StringIO(text)) if any(c.strip() for c in r)]
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from None
    if not rows:
        raise MalformedHeaderError("empty input, header required")

    header = [c.strip() for c in rows[0]]
    if header:
        header[0] = header[0].lstrip("﻿")
    if header == _CSV_CORE:
        has_budget_cols = False
    elif header == _CSV_FULL:
        has_budget_cols = True
    else:
        raise MalformedHeaderError(
            f"header must be {','.join(_CSV_CORE)} or {','.join(_CSV_FULL)}, got {','.join(header)!r}"
        )

    results = []
    for row_no, raw in enumerate(rows[1:], start=1):
        cells = [c.strip() for c in raw]
        expected = len(_CSV_FULL) if has_budget_cols else len(_CSV_CORE)
        if len(cells) != expected:
            raise MalformedRowError(row_no, f"expected {expected} columns, got {len(cells)}")
        lab_id = cells[0]
        x = _float_cell(cells[1], row_no, "x")
        u_x = _float_cell(cells[2], row_no, "u_x")
        budget = None
        if has_budget_cols and any(cells[3:]):
            parts = {}
            for col, cell in zip(_CSV_FULL[3:], cells[3:]):
                parts[col] = _float_cell(cell, row_no, col) if cell else None
            budget = UncertaintyBudget(
                s_Y=parts["s_Y"] if parts["s_Y"] is not None else 0.0,
                u_e=parts["u_e"] if parts["u_e"] is not None else 0.0,
                s_b=parts["s_b"],
                b=parts["b"],
            )
        results.append(LabResult(lab_id=lab_id, x=x, u_x=u_x, budget=budget))

    comparison = Comparison(results=tuple(results), model=model)
    return _validate_with_rows(comparison)


def _validate_with_rows(comparison: Comparison) -> Comparison:
    """Run core validation, rewriting violations to carry row numbers."""
    row_of = {}
    for idx, r in enumerate(comparison.results, start=1):
        row_of.setdefault(f"lab {r.lab_id!r}", idx)
        row_of.setdefault(f"lab #{idx}", idx)
    try:
        return validate(comparison)
    except ValidationError as exc:
        rewritten = []
        for v in exc.violations:
            row = row_of.get(v.where)
            where = f"row {row}, {v.where}" if row is not None else v.where
            rewritten.append(Violation(code=v.code, where=where, message=v.message))
        raise ValidationError(rewritten) from None


def _parse_budget_obj(obj, row: int) -> UncertaintyBudget | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise MalformedRowError(row, f"budget must be an object or null, got {obj!r}")
    return UncertaintyBudget(
        s_Y=_as_opt_number(obj.get("s_Y"), row, "s_Y") or 0.0,
        u_e=_as_opt_number(obj.get("u_e"), row, "u_e") or 0.0,
        s_b=_as_opt_number(obj.get("s_b"), row, "s_b"),
        b=_as_opt_number(obj.get("b"), row, "b"),
    )


def _parse_json_comparison(text: str, model: EffectModel | None) -> Comparison:
    obj = _load_json(text)
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    _check_schema_version(obj)
    model = _parse_model(obj.get("model"), model)
    y = _as_opt_number(obj.get("Y"), 0, "Y")
    labs = obj.get("labs")
    if not isinstance(labs, list):
        raise ParseError("'labs' must be an array")
    results = []
    for idx, entry in enumerate(labs, start=1):
        if not isinstance(entry, dict):
            raise MalformedRowError(idx, f"lab entry must be an object, got {entry!r}")
        lab_id = entry.get("lab_id")
        if not isinstance(lab_id, str):
            raise MalformedRowError(idx, f"lab_id must be a string, got {lab_id!r}")
        results.append(
            LabResult(
                lab_id=lab_id,
                x=_as_number(entry.get("x"), idx, "x"),
                u_x=_as_number(entry.get("u_x"), idx, "u_x"),
                budget=_parse_budget_obj(entry.get("budget"), idx),
            )
        )
    comparison = Comparison(results=tuple(results), model=model, Y=y)
    return _validate_with_rows(comparison)


def parse_comparison(
    data: bytes | str,
    format: FileFormat,
    model: EffectModel | None = None,
) -> Comparison:
    """Parse and validate comparison data.

    CSV carries no model field, so ``model`` is required for CSV; for
    JSON it overrides the file's model when given.
    """
    text = _decode(data)
    if format is FileFormat.CSV:
        return _parse_csv_comparison(text, model)
    return _parse_json_comparison(text, model)


def _num_repr(value: float) -> str:
    return repr(float(value))


def _budget_dict(budget: UncertaintyBudget | None):
    if budget is None:
        return None
    return {"s_Y": budget.s_Y, "u_e": budget.u_e, "s_b": budget.s_b, "b": budget.b}


def _dump(obj: dict) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def emit_comparison(comparison: Comparison, format: FileFormat) -> bytes:
    """Canonical serialization; CSV drops the model and Y (not part of
    the lab table)."""
    if format is FileFormat.JSON:
        return _dump(
            {
                "schema_version": SCHEMA_VERSION,
                "model": comparison.model.value,
                "Y": comparison.Y,
                "labs": [
                    {
                        "lab_id": r.lab_id,
                        "x": r.x,
                        "u_x": r.u_x,
                        "budget": _budget_dict(r.budget),
                    }
                    for r in comparison.results
                ],
            }
        )
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CSV_FULL)
    for r in comparison.results:
        budget = r.budget
        writer.writerow(
            [
                r.lab_id,
                _num_repr(r.x),
                _num_repr(r.u_x),
                _num_repr(budget.s_Y) if budget is not None else "",
                _num_repr(budget.u_e) if budget is not None else "",
                _num_repr(budget.s_b) if budget is not None and budget.s_b is not None else "",
                _num_repr(budget.b) if budget is not None and budget.b is not None else "",
            ]
        )
    return out.getvalue().encode("utf-8")


def parse_sim_spec(
    data: bytes | str,
    seed: int | None = None,
    n_reps: int | None = None,
) -> SimSpec:
    """Parse a simulation recipe (JSON only); ``seed``/``n_reps``
    arguments override the file's values."""
    obj = _load_json(_decode(data))
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    _check_schema_version(obj)

    model = _parse_model(obj.get("model"), None)
    y = _as_number(obj.get("Y"), 0, "Y")

    labs = obj.get("labs")
    if not isinstance(labs, list) or not labs:
        raise ParseError("'labs' must be a non-empty array")
    budgets = []
    lab_ids: list[str | None] = []
    for idx, entry in enumerate(labs, start=1):
        if not isinstance(entry, dict):
            raise MalformedRowError(idx, f"lab entry must be an object, got {entry!r}")
        lab_id = entry.get("lab_id")
        if lab_id is not None and not isinstance(lab_id, str):
            raise MalformedRowError(idx, f"lab_id must be a string, got {lab_id!r}")
        lab_ids.append(lab_id)
        budgets.append(
            UncertaintyBudget(
                s_Y=_as_opt_number(entry.get("s_Y"), idx, "s_Y") or 0.0,
                u_e=_as_opt_number(entry.get("u_e"), idx, "u_e") or 0.0,
                s_b=_as_opt_number(entry.get("s_b"), idx, "s_b"),
                b=_as_opt_number(entry.get("b"), idx, "b"),
            )
        )
    if any(lid is None for lid in lab_ids):
        if any(lid is not None for lid in lab_ids):
            raise ParseError("either every lab entry has a lab_id or none does")
        resolved_ids = None
    else:
        resolved_ids = tuple(lab_ids)  # type: ignore[arg-type]

    if seed is None:
        seed = obj.get("seed")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ParseError(f"seed must be an integer, got {seed!r}")
    if n_reps is None:
        n_reps = obj.get("n_reps")
    if isinstance(n_reps, bool) or not isinstance(n_reps, int):
        raise ParseError(f"n_reps must be an integer, got {n_reps!r}")

    shared = obj.get("shared_true_value", True)
    if not isinstance(shared, bool):
        raise ParseError(f"shared_true_value must be a boolean, got {shared!r}")
    dist_name = obj.get("distribution", Distribution.GAUSSIAN.value)
    try:
        distribution = Distribution(dist_name)
    except ValueError:
        raise ParseError(f"unknown distribution {dist_name!r}") from None

    spec = SimSpec(
        Y=y,
        budgets=tuple(budgets),
        model=model,
        n_reps=n_reps,
        seed=seed,
        shared_true_value=shared,
        distribution=distribution,
        lab_ids=resolved_ids,
    )
    return validate_spec(spec)


def emit_sim_spec(spec: SimSpec) -> bytes:
    labs = []
    for lab_id, budget in zip(spec.resolved_lab_ids(), spec.budgets):
        labs.append(
            {
                "lab_id": lab_id,
                "s_Y": budget.s_Y,
                "u_e": budget.u_e,
                "s_b": budget.s_b,
                "b": budget.b,
            }
        )
    return _dump(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "sim_spec",
            "Y": spec.Y,
            "model": spec.model.value,
            "shared_true_value": spec.shared_true_value,
            "distribution": spec.distribution.value,
            "n_reps": spec.n_reps,
            "seed": spec.seed,
            "labs": labs,
        }
    )


# --- report serialization ---------------------------------------------------


def _kcrv_dict(k: KcrvEstimate) -> dict:
    return {
        "lab_ids": list(k.lab_ids),
        "model": k.model.value,
        "x_K": k.x_K,
        "u_xK": k.u_xK,
        "weights": list(k.weights),
    }


def _consistency_dict(c: ConsistencyCheck | None):
    if c is None:
        return None
    return {
        "chi2_obs": c.chi2_obs,
        "dof": c.dof,
        "p_value": c.p_value,
        "passed": c.passed,
        "alpha": c.alpha,
    }


def _doe_report_dict(report: DoeReport) -> dict:
    return {
        "kind": "doe_report",
        "schema_version": SCHEMA_VERSION,
        "kcrv": _kcrv_dict(report.kcrv),
        "unilateral": [
            {
                "lab_id": e.lab_id,
                "d": e.d,
                "u_d": e.u_d,
                "U_d": e.U_d,
                "k": e.k,
                "equivalent": e.equivalent,
            }
            for e in report.unilateral
        ],
        "bilateral": [
            [
                {
                    "lab_i": e.lab_i,
                    "lab_j": e.lab_j,
                    "d_ij": e.d_ij,
                    "u_dij": e.u_dij,
                    "U_dij": e.U_dij,
                    "equivalent": e.equivalent,
                }
                for e in row
            ]
            for row in report.bilateral
        ],
        "consistency": _consistency_dict(report.consistency),
    }


def _sim_outcome_dict(outcome: SimOutcome) -> dict:
    return {
        "kind": "sim_outcome",
        "schema_version": SCHEMA_VERSION,
        "lab_ids": list(outcome.lab_ids),
        "model": outcome.model.value,
        "n_reps": outcome.n_reps,
        "seed": outcome.seed,
        "mean_xK": outcome.mean_xK,
        "var_xK": outcome.var_xK,
        "mean_d": list(outcome.mean_d),
        "var_d": list(outcome.var_d),
        "mean_dij": [list(row) for row in outcome.mean_dij],
        "var_dij": [list(row) for row in outcome.var_dij],
        "cov_x_xK": list(outcome.cov_x_xK),
        "var_x": list(outcome.var_x),
    }


def _verification_dict(report: VerificationReport) -> dict:
    return {
        "kind": "verification_report",
        "schema_version": SCHEMA_VERSION,
        "n_reps": report.n_reps,
        "seed": report.seed,
        "z": report.z,
        "passed": report.passed,
        "checks": [
            {
                "claim": c.claim,
                "subject": c.subject,
                "observed": c.observed,
                "predicted": c.predicted,
                "se": c.se,
                "passed": c.passed,
            }
            for c in report.checks
        ],
    }


def _fmt(value: float) -> str:
    return f"%.{TABLE_DIGITS}g" % value


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _matrix_csv(writer, title: str, lab_ids, cell):
    writer.writerow([f"# {title}"])
    writer.writerow([""] + list(lab_ids))
    for i, lab in enumerate(lab_ids):
        writer.writerow([lab] + [cell(i, j) for j in range(len(lab_ids))])


def _doe_report_csv(report: DoeReport) -> str:
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    k = report.kcrv
    writer.writerow(["# kcrv", f"x_K={_fmt(k.x_K)}", f"u_xK={_fmt(k.u_xK)}", f"model={k.model.value}"])
    if report.consistency is not None:
        c = report.consistency
        writer.writerow(
            [
                "# consistency",
                f"chi2_obs={_fmt(c.chi2_obs)}",
                f"dof={c.dof}",
                f"p_value={_fmt(c.p_value)}",
                f"passed={_bool(c.passed)}",
            ]
        )
    writer.writerow(["lab_id", "d", "u_d", "U_d", "equivalent"])
    for e in report.unilateral:
        writer.writerow([e.lab_id, _fmt(e.d), _fmt(e.u_d), _fmt(e.U_d), _bool(e.equivalent)])
    lab_ids = k.lab_ids
    _matrix_csv(writer, "bilateral d_ij", lab_ids, lambda i, j: _fmt(report.bilateral[i][j].d_ij))
    _matrix_csv(writer, "bilateral u_dij", lab_ids, lambda i, j: _fmt(report.bilateral[i][j].u_dij))
    return out.getvalue()


def _md_table(header: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join(" --- " for _ in header) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return lines


def _doe_report_md(report: DoeReport) -> str:
    k = report.kcrv
    lines = [
        f"Reference value: x_K = {_fmt(k.x_K)}, u(x_K) = {_fmt(k.u_xK)} (model: {k.model.value})",
        "",
    ]
    if report.consistency is not None:
        c = report.consistency
        lines += [
            f"Consistency: chi2_obs = {_fmt(c.chi2_obs)}, dof = {c.dof}, "
            f"p = {_fmt(c.p_value)}, passed = {_bool(c.passed)} (alpha = {_fmt(c.alpha)})",
            "",
        ]
    lines += _md_table(
        ["lab_id", "d", "u_d", "U_d", "equivalent"],
        [
            [e.lab_id, _fmt(e.d), _fmt(e.u_d), _fmt(e.U_d), _bool(e.equivalent)]
            for e in report.unilateral
        ],
    )
    lines.append("")
    lab_ids = list(k.lab_ids)
    lines += _md_table(
        ["d_ij"] + lab_ids,
        [
            [lab_ids[i]] + [_fmt(report.bilateral[i][j].d_ij) for j in range(len(lab_ids))]
            for i in range(len(lab_ids))
        ],
    )
    lines.append("")
    lines += _md_table(
        ["u_dij"] + lab_ids,
        [
            [lab_ids[i]] + [_fmt(report.bilateral[i][j].u_dij) for j in range(len(lab_ids))]
            for i in range(len(lab_ids))
        ],
    )
    return "\n".join(lines) + "\n"


def _sim_outcome_csv(outcome: SimOutcome) -> str:
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "# sim_outcome",
            f"model={outcome.model.value}",
            f"n_reps={outcome.n_reps}",
            f"seed={outcome.seed}",
            f"mean_xK={_fmt(outcome.mean_xK)}",
            f"var_xK={_fmt(outcome.var_xK)}",
        ]
    )
    writer.writerow(["lab_id", "mean_d", "var_d", "cov_x_xK", "var_x"])
    for i, lab in enumerate(outcome.lab_ids):
        writer.writerow(
            [
                lab,
                _fmt(outcome.mean_d[i]),
                _fmt(outcome.var_d[i]),
                _fmt(outcome.cov_x_xK[i]),
                _fmt(outcome.var_x[i]),
            ]
        )
    _matrix_csv(writer, "mean_dij", outcome.lab_ids, lambda i, j: _fmt(outcome.mean_dij[i][j]))
    _matrix_csv(writer, "var_dij", outcome.lab_ids, lambda i, j: _fmt(outcome.var_dij[i][j]))
    return out.getvalue()


def _sim_outcome_md(outcome: SimOutcome) -> str:
    lines = [
        f"Simulation: model = {outcome.model.value}, n_reps = {outcome.n_reps}, "
        f"seed = {outcome.seed}, mean x_K = {_fmt(outcome.mean_xK)}, "
        f"var x_K = {_fmt(outcome.var_xK)}",
        "",
    ]
    lines += _md_table(
        ["lab_id", "mean_d", "var_d", "cov_x_xK", "var_x"],
        [
            [
                lab,
                _fmt(outcome.mean_d[i]),
                _fmt(outcome.var_d[i]),
                _fmt(outcome.cov_x_xK[i]),
                _fmt(outcome.var_x[i]),
            ]
            for i, lab in enumerate(outcome.lab_ids)
        ],
    )
    lines.append("")
    labs = list(outcome.lab_ids)
    lines += _md_table(
        ["mean_dij"] + labs,
        [[labs[i]] + [_fmt(outcome.mean_dij[i][j]) for j in range(len(labs))] for i in range(len(labs))],
    )
    return "\n".join(lines) + "\n"


def _verification_csv(report: VerificationReport) -> str:
    out = _stdio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "# verification",
            f"n_reps={report.n_reps}",
            f"seed={report.seed}",
            f"z={_fmt(report.z)}",
            f"passed={_bool(report.passed)}",
        ]
    )
    writer.writerow(["claim", "subject", "observed", "predicted", "se", "passed"])
    for c in report.checks:
        writer.writerow(
            [c.claim, c.subject, _fmt(c.observed), _fmt(c.predicted), _fmt(c.se), _bool(c.passed)]
        )
    return out.getvalue()


def _verification_md(report: VerificationReport) -> str:
    lines = [
        f"Verification: n_reps = {report.n_reps}, seed = {report.seed}, "
        f"z = {_fmt(report.z)}, passed = {_bool(report.passed)}",
        "",
    ]
    lines += _md_table(
        ["claim", "subject", "observed", "predicted", "se", "passed"],
        [
            [c.claim, c.subject, _fmt(c.observed), _fmt(c.predicted), _fmt(c.se), _bool(c.passed)]
            for c in report.checks
        ],
    )
    return "\n".join(lines) + "\n"


def emit_report(
    report: DoeReport | SimOutcome | VerificationReport,
    format: ReportFormat,
) -> bytes:
    """Render a report. JSON is lossless (full float precision); CSV and
    Markdown are tables at TABLE_DIGITS significant digits."""
    if isinstance(report, DoeReport):
        to_dict, to_csv, to_md = _doe_report_dict, _doe_report_csv, _doe_report_md
    elif isinstance(report, SimOutcome):
        to_dict, to_csv, to_md = _sim_outcome_dict, _sim_outcome_csv, _sim_outcome_md
    elif isinstance(report, VerificationReport):
        to_dict, to_csv, to_md = _verification_dict, _verification_csv, _verification_md
    else:
        raise TypeError(f"not a report type: {type(report).__name__}")
    if format is ReportFormat.JSON:
        return _dump(to_dict(report))
    if format is ReportFormat.CSV:
        return to_csv(report).encode("utf-8")
    return to_md(report).encode("utf-8")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ParseError(message)


def _rebuild_kcrv(obj) -> KcrvEstimate:
    _require(isinstance(obj, dict), "kcrv must be an object")
    return KcrvEstimate(
        x_K=_as_number(obj.get("x_K"), 0, "x_K"),
        u_xK=_as_number(obj.get("u_xK"), 0, "u_xK"),
        weights=tuple(_as_number(v, 0, "weights") for v in obj.get("weights", [])),
        lab_ids=tuple(str(v) for v in obj.get("lab_ids", [])),
        model=_parse_model(obj.get("model"), None),
    )


def _rebuild_doe_report(obj: dict) -> DoeReport:
    unilateral = tuple(
        DoeUnilateral(
            lab_id=str(e.get("lab_id")),
            d=_as_number(e.get("d"), i, "d"),
            u_d=_as_number(e.get("u_d"), i, "u_d"),
            U_d=_as_number(e.get("U_d"), i, "U_d"),
            k=_as_number(e.get("k"), i, "k"),
            equivalent=bool(e.get("equivalent")),
        )
        for i, e in enumerate(obj.get("unilateral", []), start=1)
    )
    bilateral = tuple(
        tuple(
            DoeBilateral(
                lab_i=str(e.get("lab_i")),
                lab_j=str(e.get("lab_j")),
                d_ij=_as_number(e.get("d_ij"), i, "d_ij"),
                u_dij=_as_number(e.get("u_dij"), i, "u_dij"),
                U_dij=_as_number(e.get("U_dij"), i, "U_dij"),
                equivalent=bool(e.get("equivalent")),
            )
            for e in row
        )
        for i, row in enumerate(obj.get("bilateral", []), start=1)
    )
    cons = obj.get("consistency")
    consistency = None
    if cons is not None:
        _require(isinstance(cons, dict), "consistency must be an object or null")
        consistency = ConsistencyCheck(
            chi2_obs=_as_number(cons.get("chi2_obs"), 0, "chi2_obs"),
            dof=int(_as_number(cons.get("dof"), 0, "dof")),
            p_value=_as_number(cons.get("p_value"), 0, "p_value"),
            passed=bool(cons.get("passed")),
            alpha=_as_number(cons.get("alpha"), 0, "alpha"),
        )
    return DoeReport(
        kcrv=_rebuild_kcrv(obj.get("kcrv")),
        unilateral=unilateral,
        bilateral=bilateral,
        consistency=consistency,
    )


def _rebuild_sim_outcome(obj: dict) -> SimOutcome:
    def vec(name):
        return tuple(_as_number(v, 0, name) for v in obj.get(name, []))

    def mat(name):
        return tuple(tuple(_as_number(v, 0, name) for v in row) for row in obj.get(name, []))

    seed = obj.get("seed")
    n_reps = obj.get("n_reps")
    _require(isinstance(seed, int) and not isinstance(seed, bool), "seed must be an integer")
    _require(isinstance(n_reps, int) and not isinstance(n_reps, bool), "n_reps must be an integer")
    return SimOutcome(
        lab_ids=tuple(str(v) for v in obj.get("lab_ids", [])),
        model=_parse_model(obj.get("model"), None),
        n_reps=n_reps,
        seed=seed,
        mean_xK=_as_number(obj.get("mean_xK"), 0, "mean_xK"),
        var_xK=_as_number(obj.get("var_xK"), 0, "var_xK"),
        mean_d=vec("mean_d"),
        var_d=vec("var_d"),
        mean_dij=mat("mean_dij"),
        var_dij=mat("var_dij"),
        cov_x_xK=vec("cov_x_xK"),
        var_x=vec("var_x"),
    )


def _rebuild_verification(obj: dict) -> VerificationReport:
    seed = obj.get("seed")
    n_reps = obj.get("n_reps")
    _require(isinstance(seed, int) and not isinstance(seed, bool), "seed must be an integer")
    _require(isinstance(n_reps, int) and not isinstance(n_reps, bool), "n_reps must be an integer")
    checks = tuple(
        VerificationCheck(
            claim=str(c.get("claim")),
            subject=str(c.get("subject")),
            observed=_as_number(c.get("observed"), i, "observed"),
            predicted=_as_number(c.get("predicted"), i, "predicted"),
            se=_as_number(c.get("se"), i, "se"),
            passed=bool(c.get("passed")),
        )
        for i, c in enumerate(obj.get("checks", []), start=1)
    )
    return VerificationReport(
        checks=checks,
        n_reps=n_reps,
        seed=seed,
        z=_as_number(obj.get("z"), 0, "z"),
        passed=bool(obj.get("passed")),
    )


def parse_report(data: bytes | str) -> DoeReport | SimOutcome | VerificationReport:
    """Rebuild a report from its canonical JSON form."""
    obj = _load_json(_decode(data))
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    _check_schema_version(obj)
    kind = obj.get("kind")
    if kind == "doe_report":
        return _rebuild_doe_report(obj)
    if kind == "sim_outcome":
        return _rebuild_sim_outcome(obj)
    if kind == "verification_report":
        return _rebuild_verification(obj)
    raise ParseError(f"unknown report kind: {kind!r}")
