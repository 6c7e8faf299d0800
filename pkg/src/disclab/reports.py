"""Deterministic serialization of result objects.

JSON output is rendered by a small canonical writer: insertion-ordered
fields, floats printed with 17 significant digits (exact float64
round-trip), no locale or timestamp dependence, so byte-identical reruns
are possible.  Histograms additionally serialize to the CSV layout
``bin_lo,bin_hi,count``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Any

import numpy as np

from .discrepancy import DiscrepancyResult, sign_string
from .errors import ParameterError
from .landscape import Histogram, StabilityReport, TupleCertificate
from .online import OnlineResult
from .theory import (CovarianceReport, ExponentReport, McEstimate, OgpParams,
                     StableConstants, TupleCountEstimate)


def _render_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def render_json(value: Any, indent: int = 0) -> str:
    """Canonical JSON text; dict order preserved, floats at 17 digits."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            f'{inner}"{k}": {render_json(v, indent + 2)}' for k, v in value.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        seq = list(value)
        if not seq:
            return "[]"
        flat = all(not isinstance(v, (dict, list, tuple)) for v in seq)
        if flat and len(seq) <= 16:
            return "[" + ", ".join(render_json(v) for v in seq) + "]"
        items = ",\n".join(f"{inner}{render_json(v, indent + 2)}" for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _render_float(float(value))
    if isinstance(value, str):
        import json
        return json.dumps(value)
    raise ParameterError(f"cannot serialize value of type {type(value)!r}")


def _listify(arr) -> list:
    a = np.asarray(arr)
    if a.dtype.kind in "iub":
        return [int(v) for v in a.ravel()]
    return [float(v) for v in a.ravel()]


def to_payload(result: Any) -> Any:
    """Convert a result object into JSON-ready primitives."""
    if isinstance(result, DiscrepancyResult):
        return {"value": result.value, "argmin": sign_string(result.argmin),
                "row_sums": _listify(result.row_sums)}
    if isinstance(result, OnlineResult):
        return {"value": result.value, "sigma": sign_string(result.sigma),
                "row_sums": _listify(result.row_sums)}
    if isinstance(result, ExponentReport):
        return {"value": result.value, "terms": dict(result.terms),
                "params": dict(result.params), "verdict": result.verdict,
                "scale": result.scale}
    if isinstance(result, TupleCertificate):
        return {"found": True,
                "members": [sign_string(row) for row in result.members],
                "overlaps": _listify(result.overlaps),
                "disc_values": _listify(result.disc_values),
                "tau_or_delta": dict(result.tau_or_delta),
                "threshold": result.threshold}
    if isinstance(result, Histogram):
        return {"bin_edges": _listify(result.bin_edges),
                "counts": _listify(result.counts)}
    if isinstance(result, StabilityReport):
        return {"rho": result.rho, "trials": result.trials, "n": result.n,
                "rows": result.rows, "threshold": result.threshold,
                "success_rate": result.success_rate,
                "success_rate_perturbed": result.success_rate_perturbed,
                "quantiles": dict(result.quantiles),
                "fit_f": result.fit_f, "fit_L": result.fit_L,
                "d_hamming": _listify(result.d_hamming),
                "frobenius": _listify(result.frobenius)}
    if isinstance(result, CovarianceReport):
        return {"pd": result.pd, "det": result.det,
                "det_lower_bound": result.det_lower_bound,
                "eigenvalues": _listify(result.eigenvalues)}
    if isinstance(result, (McEstimate, OgpParams, StableConstants, TupleCountEstimate)):
        return dataclasses.asdict(result)
    if isinstance(result, dict):
        return result
    if isinstance(result, (list, tuple)):
        return [to_payload(v) for v in result]
    if isinstance(result, (str, int, float, bool)) or result is None:
        return result
    if isinstance(result, (np.integer, np.floating, np.ndarray)):
        return _listify(result) if isinstance(result, np.ndarray) else result.item()
    raise ParameterError(f"no serialization for {type(result)!r}")


def histogram_csv(hist: Histogram) -> str:
    lines = ["bin_lo,bin_hi,count"]
    for lo, hi, c in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts):
        lines.append(f"{_render_float(float(lo))},{_render_float(float(hi))},{int(c)}")
    return "\n".join(lines) + "\n"


def _rows_csv(rows: list[dict]) -> str:
    if not rows:
        return "\n"
    header = list(rows[0].keys())
    out = [",".join(header)]
    for row in rows:
        cells = []
        for k in header:
            v = row[k]
            if isinstance(v, float):
                cells.append(_render_float(v))
            else:
                cells.append(str(v))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def emit_report(result: Any, fmt: str = "json", path=None) -> str:
    """Serialize ``result``; write to ``path`` when given, return the text."""
    if fmt not in ("json", "csv"):
        raise ParameterError(f"format must be 'json' or 'csv', got {fmt!r}")
    if fmt == "csv":
        if isinstance(result, Histogram):
            text = histogram_csv(result)
        elif isinstance(result, list) and all(isinstance(r, dict) for r in result):
            text = _rows_csv(result)
        else:
            payload = to_payload(result)
            if not isinstance(payload, dict):
                raise ParameterError("csv output needs a histogram, row list, or flat result")
            text = _rows_csv([{k: v for k, v in payload.items()
                               if not isinstance(v, (dict, list))}])
    else:
        text = render_json(to_payload(result)) + "\n"
    if path is not None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
    return text
