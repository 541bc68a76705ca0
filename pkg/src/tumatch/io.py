"""Reading and writing markets, wages, and solver results as JSON.

Documents are plain JSON so that other tools can produce and consume them.
Writing is deterministic: keys are sorted, floats are rendered with repr-
level precision through a fixed format, arrays keep their row structure,
and nothing (timestamps, hostnames) is ever injected, so the same inputs
always produce byte-identical files and floats survive a round trip
bitwise. Non-finite numbers are rejected on write; every read error names
the file and the offending key path.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from tumatch.market import (
    GeneralizedNestedLogit,
    Logit,
    MarketSpec,
    NestedLogit,
    ValidatedSpec,
    validate_spec,
)
from tumatch.solver import SolveOptions, SolveResult

__all__ = [
    "MarketFileError",
    "FORMAT_VERSION",
    "dumps_canonical",
    "market_document",
    "result_document",
    "load_market",
    "save_market",
    "save_result",
    "load_result",
    "load_wages",
]

FORMAT_VERSION = "1"


class MarketFileError(ValueError):
    """A market or result document is malformed."""


def _format_scalar(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            raise MarketFileError(f"cannot serialize non-finite number {value!r}")
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise MarketFileError(f"cannot serialize value of type {type(value).__name__}")


def _is_scalar(value) -> bool:
    return not isinstance(value, (dict, list, tuple, np.ndarray))


def _write(value, indent: int, out: list) -> None:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise MarketFileError(f"document keys must be strings; got {key!r}")
            out.append(f"{inner}{json.dumps(key)}: ")
            _write(value[key], indent + 1, out)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(f"{pad}}}")
        return
    if isinstance(value, (list, tuple, np.ndarray)):
        items = list(value)
        if all(_is_scalar(item) for item in items):
            out.append("[" + ", ".join(_format_scalar(item) for item in items) + "]")
            return
        out.append("[\n")
        for i, item in enumerate(items):
            out.append(inner)
            _write(item, indent + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(f"{pad}]")
        return
    out.append(_format_scalar(value))


def dumps_canonical(document: dict) -> str:
    """Serialize a document deterministically; same input, same bytes."""
    out: list = []
    _write(document, 0, out)
    out.append("\n")
    return "".join(out)


def _load_document(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MarketFileError(f"{path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MarketFileError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise MarketFileError(f"{path}: top level must be an object")
    return doc


def _get(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise MarketFileError(f"missing key '{where}.{key}'" if where else f"missing key '{key}'")
    return mapping[key]


def _as_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise MarketFileError(f"'{where}' must be an object")
    return value


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        label = f"{where}.{unknown[0]}" if where else unknown[0]
        raise MarketFileError(f"unknown key '{label}'")


def _string(value, where: str) -> str:
    if not isinstance(value, str):
        raise MarketFileError(f"'{where}' must be a string")
    return value


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MarketFileError(f"'{where}' must be a number")
    return float(value)


def _number_vector(value, where: str) -> list:
    if not isinstance(value, list) or not value:
        raise MarketFileError(f"'{where}' must be a nonempty array of numbers")
    return [_number(item, f"{where}[{i + 1}]") for i, item in enumerate(value)]


def _int_vector(value, where: str) -> list:
    if not isinstance(value, list) or not value:
        raise MarketFileError(f"'{where}' must be a nonempty array of integers")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, int):
            raise MarketFileError(f"'{where}[{i + 1}]' must be an integer")
        out.append(item)
    return out


def _number_matrix(value, where: str) -> list:
    if not isinstance(value, list) or not value:
        raise MarketFileError(f"'{where}' must be a nonempty array of rows")
    rows = []
    width = None
    for i, row in enumerate(value):
        parsed = _number_vector(row, f"{where}[{i + 1}]")
        if width is None:
            width = len(parsed)
        elif len(parsed) != width:
            raise MarketFileError(
                f"'{where}[{i + 1}]' has length {len(parsed)}; expected {width}"
            )
        rows.append(parsed)
    return rows


def _check_version(doc: dict) -> None:
    meta = _as_mapping(_get(doc, "meta", ""), "meta")
    _reject_unknown(meta, {"format_version", "name"}, "meta")
    version = _string(_get(meta, "format_version", "meta"), "meta.format_version")
    if version != FORMAT_VERSION:
        raise MarketFileError(
            f"unsupported format_version {version!r}; this build reads {FORMAT_VERSION!r}"
        )


def _parse_choice_model(value, where: str):
    mapping = _as_mapping(value, where)
    kind = _string(_get(mapping, "kind", where), f"{where}.kind")
    if kind == "logit":
        _reject_unknown(mapping, {"kind"}, where)
        return Logit()
    if kind == "nested_logit":
        _reject_unknown(mapping, {"kind", "nest_of", "lambda"}, where)
        nest_of = _int_vector(_get(mapping, "nest_of", where), f"{where}.nest_of")
        lam = _number_vector(_get(mapping, "lambda", where), f"{where}.lambda")
        return NestedLogit(nest_of=tuple(nest_of), lam=tuple(lam))
    if kind == "generalized_nested_logit":
        _reject_unknown(mapping, {"kind", "membership", "lambda"}, where)
        membership = _number_matrix(_get(mapping, "membership", where), f"{where}.membership")
        lam = _number_vector(_get(mapping, "lambda", where), f"{where}.lambda")
        return GeneralizedNestedLogit(membership=np.asarray(membership), lam=tuple(lam))
    raise MarketFileError(
        f"'{where}.kind' must be 'logit', 'nested_logit', or "
        f"'generalized_nested_logit'; got {kind!r}"
    )


def _parse_side(doc: dict, side: str, payoff_key: str):
    mapping = _as_mapping(_get(doc, side, ""), side)
    _reject_unknown(
        mapping, {"mass", "scale", "wage_sensitivity", payoff_key, "choice_model"}, side
    )
    mass = _number_vector(_get(mapping, "mass", side), f"{side}.mass")
    scale = _number_vector(_get(mapping, "scale", side), f"{side}.scale")
    sensitivity = None
    if "wage_sensitivity" in mapping:
        sensitivity = _number_vector(mapping["wage_sensitivity"], f"{side}.wage_sensitivity")
    payoff = _number_matrix(_get(mapping, payoff_key, side), f"{side}.{payoff_key}")
    model = Logit()
    if "choice_model" in mapping:
        model = _parse_choice_model(mapping["choice_model"], f"{side}.choice_model")
    return mass, scale, sensitivity, payoff, model


def load_market(path) -> ValidatedSpec:
    """Read and validate a market document."""
    doc = _load_document(path)
    try:
        _reject_unknown(doc, {"meta", "workers", "firms"}, "")
        _check_version(doc)
        w_mass, w_scale, w_eta, utility, w_model = _parse_side(doc, "workers", "utility")
        f_mass, f_scale, f_eta, productivity, f_model = _parse_side(
            doc, "firms", "productivity"
        )
    except MarketFileError as exc:
        raise MarketFileError(f"{path}: {exc}") from exc
    return validate_spec(MarketSpec(
        worker_mass=w_mass,
        firm_mass=f_mass,
        worker_utility=utility,
        firm_productivity=productivity,
        worker_scale=w_scale,
        firm_scale=f_scale,
        worker_wage_sensitivity=w_eta,
        firm_wage_sensitivity=f_eta,
        worker_model=w_model,
        firm_model=f_model,
    ))


def _model_document(model) -> dict:
    if isinstance(model, Logit):
        return {"kind": "logit"}
    if isinstance(model, NestedLogit):
        return {
            "kind": "nested_logit",
            "nest_of": list(model.nest_of),
            "lambda": list(model.lam),
        }
    return {
        "kind": "generalized_nested_logit",
        "membership": model.membership.tolist(),
        "lambda": list(model.lam),
    }


def market_document(spec) -> dict:
    """The JSON document of a market specification."""
    spec = validate_spec(spec)
    return {
        "meta": {"format_version": FORMAT_VERSION},
        "workers": {
            "mass": spec.worker_mass.tolist(),
            "scale": spec.worker_scale.tolist(),
            "wage_sensitivity": spec.worker_wage_sensitivity.tolist(),
            "utility": spec.worker_utility.tolist(),
            "choice_model": _model_document(spec.worker_model),
        },
        "firms": {
            "mass": spec.firm_mass.tolist(),
            "scale": spec.firm_scale.tolist(),
            "wage_sensitivity": spec.firm_wage_sensitivity.tolist(),
            "productivity": spec.firm_productivity.tolist(),
            "choice_model": _model_document(spec.firm_model),
        },
    }


def save_market(path, spec) -> None:
    """Write a market document; deterministic bytes for identical specs."""
    Path(path).write_text(dumps_canonical(market_document(spec)), encoding="utf-8")


def result_document(result: SolveResult, options: SolveOptions) -> dict:
    """The JSON document of a solver result and the options that produced it."""
    initial = options.initial_wages
    doc = {
        "meta": {"format_version": FORMAT_VERSION},
        "converged": result.converged,
        "iterations": result.iterations,
        "final_update_norm": result.final_update_norm,
        "final_clearing_residual": result.final_clearing_residual,
        "wages": result.wages.tolist(),
        "matching": {
            "matched": result.matching.matched.tolist(),
            "unmatched_workers": result.matching.unmatched_workers.tolist(),
            "vacant_firms": result.matching.vacant_firms.tolist(),
        },
        "options": {
            "tolerance": options.tolerance,
            "max_iterations": options.max_iterations,
            "initial_wages": "zeros" if initial is None
            else np.asarray(initial, dtype=np.float64).tolist(),
            "trace_every": options.trace_every,
        },
    }
    if result.trace is not None:
        doc["trace"] = [list(entry) for entry in result.trace]
    return doc


def save_result(path, result: SolveResult, options: SolveOptions) -> None:
    """Write a result document; deterministic bytes for identical results."""
    Path(path).write_text(dumps_canonical(result_document(result, options)), encoding="utf-8")


def load_result(path) -> dict:
    """Read a result document back as a plain dictionary."""
    doc = _load_document(path)
    try:
        _check_version(doc)
        for key in ("converged", "iterations", "wages", "matching", "options"):
            _get(doc, key, "")
    except MarketFileError as exc:
        raise MarketFileError(f"{path}: {exc}") from exc
    return doc


def load_wages(path) -> np.ndarray:
    """Read a wage matrix from any document with a top-level "wages" key.

    Accepts both solver result files and hand-written documents like
    ``{"wages": [[0.0]]}``.
    """
    doc = _load_document(path)
    try:
        matrix = _number_matrix(_get(doc, "wages", ""), "wages")
    except MarketFileError as exc:
        raise MarketFileError(f"{path}: {exc}") from exc
    return np.asarray(matrix, dtype=np.float64)
