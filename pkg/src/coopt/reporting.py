"""Run reports: canonical JSON, delimited traces, and report comparison.

``result.json`` is written with sorted keys and native floats so that two
runs with identical inputs produce byte-identical files apart from the
wall-time line.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import ProblemFormatError


def sanitize(obj):
    """Recursively convert numpy scalars/arrays so json can serialize them."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(sanitize(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _cell(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def read_json(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ProblemFormatError(f"report file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"{p}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})"
        ) from None
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ProblemFormatError(f"{p}: not a report file (missing 'kind')")
    return doc


# --- report comparison ------------------------------------------------------

def _assignment_of(doc: dict):
    for key in ("assignment_labels", "optimal_assignment_labels", "decision_labels"):
        if key in doc:
            return doc[key]
    return None


def _energy_of(doc: dict):
    kind = doc["kind"]
    if kind == "solve-discrete":
        return doc["certificate"]["upper_bound"]
    if kind == "oracle-enumerate":
        return doc["optimal_energy"]
    return None


def _fields_of(doc: dict):
    kind = doc["kind"]
    if kind == "solve-ground":
        return [np.asarray(f, dtype=float) for f in doc["fields"]], doc["energies"]
    if kind == "oracle-eig":
        return [np.asarray(doc["eigenvector"], dtype=float)], [doc["eigenvalue"]]
    return None, None


def compare_reports(a: dict, b: dict) -> dict:
    """Deltas between two report documents.

    Supports discrete-style reports (assignment + energy), soft reports
    (psi tables), and field-style reports (solve-ground / oracle-eig), in any
    combination within a style.  Raises ProblemFormatError when the two
    reports have nothing comparable or mismatched shapes.
    """
    out: dict = {"kind": "compare", "a_kind": a["kind"], "b_kind": b["kind"]}
    comparable = False

    asg_a, asg_b = _assignment_of(a), _assignment_of(b)
    if asg_a is not None and asg_b is not None:
        if len(asg_a) != len(asg_b):
            raise ProblemFormatError(
                f"assignments have different lengths ({len(asg_a)} vs {len(asg_b)})"
            )
        out["assignment_match"] = bool(list(asg_a) == list(asg_b))
        comparable = True

    e_a, e_b = _energy_of(a), _energy_of(b)
    if e_a is not None and e_b is not None:
        out["energy_delta"] = abs(float(e_a) - float(e_b))
        comparable = True

    if a["kind"] == "solve-soft" and b["kind"] == "solve-soft":
        ta = [np.asarray(t, dtype=float) for t in a["psi_tables"]]
        tb = [np.asarray(t, dtype=float) for t in b["psi_tables"]]
        if len(ta) != len(tb) or any(x.shape != y.shape for x, y in zip(ta, tb)):
            raise ProblemFormatError("soft tables have mismatched shapes")
        out["table_delta"] = float(
            max(np.max(np.abs(x - y)) for x, y in zip(ta, tb))
        )
        comparable = True

    fa, ea = _fields_of(a)
    fb, eb = _fields_of(b)
    if fa is not None and fb is not None:
        if len(fa) == len(fb):
            pairs = list(zip(fa, fb, ea, eb))
        elif len(fb) == 1:
            pairs = [(x, fb[0], e, eb[0]) for x, e in zip(fa, ea)]
        elif len(fa) == 1:
            pairs = [(fa[0], y, ea[0], e) for y, e in zip(fb, eb)]
        else:
            raise ProblemFormatError(
                f"cannot pair {len(fa)} fields with {len(fb)} fields"
            )
        overlaps, deltas = [], []
        for x, y, e1, e2 in pairs:
            if x.shape != y.shape:
                raise ProblemFormatError("fields have mismatched grid sizes")
            ha = a.get("grid", {}).get("h") or b.get("grid", {}).get("h")
            if ha is None:
                raise ProblemFormatError("field reports carry no grid spacing")
            overlaps.append(abs(float(ha) * float(x @ y)))
            deltas.append(abs(float(e1) - float(e2)))
        out["field_overlaps"] = overlaps
        out["energy_deltas"] = deltas
        comparable = True

    if not comparable:
        raise ProblemFormatError(
            f"reports of kind {a['kind']!r} and {b['kind']!r} have nothing to compare"
        )
    return out
