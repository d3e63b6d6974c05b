"""Problem files: JSON descriptions of discrete models and continuous systems.

Discrete schema::

    {
      "variables": [{"name": "x1", "values": [0, 1]}, ...],
      "unary":     [[0.0, 1.0], ...],          # optional, default all-zero
      "pairwise":  [{"i": 0, "j": 1, "table": [[...], ...]}, ...]  # optional
    }

Continuous schema::

    {
      "particles": [{"name": "p0", "mass": 1.0,
                     "potential": {"type": "harmonic", "m": 1, "omega": 1,
                                   "center": 0}}, ...],
      "pairs":     [{"i": 0, "j": 1,
                     "potential": {"type": "pair_harmonic", "k": 1}}, ...],
      "hbar":      1.0                           # optional, default 1.0
    }

Potentials are named built-ins with numeric parameters — no code is ever
evaluated from a problem file.  Unknown fields anywhere are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path

from .continuous import ContinuousProblem
from .model import EnergyModel, ProblemFormatError, build_model


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ProblemFormatError(f"{where}: unknown field(s) {sorted(extra)}")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ProblemFormatError(f"{where}: missing required field '{key}'")
    return obj[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


# --- named potential built-ins -------------------------------------------

def _harmonic(m: float = 1.0, omega: float = 1.0, center: float = 0.0):
    return lambda x: 0.5 * m * omega * omega * (x - center) ** 2


def _quartic(k: float = 1.0):
    return lambda x: k * x ** 4


def _box():
    return lambda x: 0.0 * x


def _pair_harmonic(k: float = 1.0):
    return lambda x, y: 0.5 * k * (x - y) ** 2


UNARY_POTENTIALS = {"harmonic": _harmonic, "quartic": _quartic, "box": _box}
PAIR_POTENTIALS = {"pair_harmonic": _pair_harmonic}


def build_potential_fn(spec: dict, where: str, pair: bool = False):
    """Instantiate a named potential from its JSON spec."""
    if not isinstance(spec, dict):
        raise ProblemFormatError(f"{where}: potential must be an object")
    registry = PAIR_POTENTIALS if pair else UNARY_POTENTIALS
    kind = _require(spec, "type", where)
    factory = registry.get(kind)
    if factory is None:
        raise ProblemFormatError(
            f"{where}: unknown potential type {kind!r}; "
            f"expected one of {sorted(registry)}"
        )
    params = {k: _number(v, f"{where}.{k}") for k, v in spec.items() if k != "type"}
    try:
        return factory(**params)
    except TypeError:
        raise ProblemFormatError(
            f"{where}: bad parameters {sorted(params)} for potential {kind!r}"
        ) from None


# --- loaders ---------------------------------------------------------------

def _parse_discrete(doc: dict, path: str) -> tuple[EnergyModel, list[str]]:
    _reject_unknown(doc, {"variables", "unary", "pairwise"}, path)
    raw_vars = _require(doc, "variables", path)
    if not isinstance(raw_vars, list) or not raw_vars:
        raise ProblemFormatError(f"{path}: 'variables' must be a nonempty list")

    names, domains = [], []
    for k, entry in enumerate(raw_vars):
        where = f"{path}: variables[{k}]"
        if not isinstance(entry, dict):
            raise ProblemFormatError(f"{where}: expected an object")
        _reject_unknown(entry, {"name", "values"}, where)
        values = _require(entry, "values", where)
        if not isinstance(values, list) or not values:
            raise ProblemFormatError(f"{where}: 'values' must be a nonempty list")
        names.append(str(entry.get("name", f"x{k}")))
        domains.append(values)

    n = len(domains)
    unary = doc.get("unary", [[0.0] * len(d) for d in domains])
    if not isinstance(unary, list) or len(unary) != n:
        raise ProblemFormatError(f"{path}: 'unary' must list one table per variable")

    pairwise = {}
    for k, entry in enumerate(doc.get("pairwise", [])):
        where = f"{path}: pairwise[{k}]"
        if not isinstance(entry, dict):
            raise ProblemFormatError(f"{where}: expected an object")
        _reject_unknown(entry, {"i", "j", "table"}, where)
        i = _require(entry, "i", where)
        j = _require(entry, "j", where)
        if not isinstance(i, int) or not isinstance(j, int):
            raise ProblemFormatError(f"{where}: 'i' and 'j' must be integers")
        if (i, j) in pairwise:
            raise ProblemFormatError(f"{where}: duplicate pair ({i}, {j})")
        pairwise[(i, j)] = _require(entry, "table", where)

    try:
        model = build_model(unary, pairwise, domains=domains)
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from None
    return model, names


def _parse_continuous(doc: dict, path: str) -> tuple[ContinuousProblem, list[str]]:
    _reject_unknown(doc, {"particles", "pairs", "hbar"}, path)
    raw_particles = _require(doc, "particles", path)
    if not isinstance(raw_particles, list) or not raw_particles:
        raise ProblemFormatError(f"{path}: 'particles' must be a nonempty list")

    names, masses, unary = [], [], []
    for k, entry in enumerate(raw_particles):
        where = f"{path}: particles[{k}]"
        if not isinstance(entry, dict):
            raise ProblemFormatError(f"{where}: expected an object")
        _reject_unknown(entry, {"name", "mass", "potential"}, where)
        names.append(str(entry.get("name", f"p{k}")))
        masses.append(_number(entry.get("mass", 1.0), f"{where}.mass"))
        unary.append(build_potential_fn(_require(entry, "potential", where), where))

    n = len(masses)
    pairs = {}
    for k, entry in enumerate(doc.get("pairs", [])):
        where = f"{path}: pairs[{k}]"
        if not isinstance(entry, dict):
            raise ProblemFormatError(f"{where}: expected an object")
        _reject_unknown(entry, {"i", "j", "potential"}, where)
        i = _require(entry, "i", where)
        j = _require(entry, "j", where)
        if not isinstance(i, int) or not isinstance(j, int):
            raise ProblemFormatError(f"{where}: 'i' and 'j' must be integers")
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ProblemFormatError(f"{where}: pair ({i}, {j}) out of range")
        if (i, j) in pairs:
            raise ProblemFormatError(f"{where}: duplicate pair ({i}, {j})")
        pairs[(i, j)] = build_potential_fn(
            _require(entry, "potential", where), where, pair=True
        )

    hbar = _number(doc.get("hbar", 1.0), f"{path}.hbar")
    try:
        problem = ContinuousProblem(masses=masses, unary=unary, pairs=pairs,
                                    hbar=hbar)
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from None
    return problem, names


def load_document(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ProblemFormatError(f"problem file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"{p}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})"
        ) from None
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{p}: top level must be an object")
    return doc


def load_discrete_problem(path) -> tuple[EnergyModel, list[str]]:
    doc = load_document(path)
    if "particles" in doc:
        raise ProblemFormatError(
            f"{path}: found a continuous problem where a discrete one was expected"
        )
    return _parse_discrete(doc, str(path))


def load_continuous_problem(path) -> tuple[ContinuousProblem, list[str]]:
    doc = load_document(path)
    if "variables" in doc:
        raise ProblemFormatError(
            f"{path}: found a discrete problem where a continuous one was expected"
        )
    return _parse_continuous(doc, str(path))
