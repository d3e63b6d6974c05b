"""Discrete energy models over finite label domains.

An energy function is a sum of per-variable (unary) tables and ordered
pairwise tables.  All tables are stored zero-based: the global minimum of
each input table is subtracted at construction time and accumulated into a
scalar ``shift`` so that stored entries are nonnegative while total energies
are preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class CooptError(Exception):
    """Base class for errors raised by this package."""


class ProblemFormatError(CooptError):
    """A problem description is malformed."""


@dataclass(frozen=True)
class DiscreteDomain:
    """Finite ordered label set for one variable. Labels are indexed 0..m-1."""

    values: tuple

    @property
    def size(self) -> int:
        return len(self.values)

    def index_of(self, label) -> int:
        try:
            return self.values.index(label)
        except ValueError:
            raise ValueError(f"label {label!r} not in domain {self.values!r}") from None


@dataclass
class EnergyModel:
    """Sum of unary and ordered-pairwise energy tables.

    Attributes
    ----------
    domains : list of DiscreteDomain
    unary : list of 1-D arrays, entry ``unary[i][x_i]``, min 0 per table
    pairwise : dict mapping ordered pair (i, j) to a (m_i, m_j) array
    shift : scalar accumulated when tables were zero-based; total energy is
        the table sum plus ``shift``
    """

    domains: list[DiscreteDomain]
    unary: list[np.ndarray]
    pairwise: dict[tuple[int, int], np.ndarray]
    shift: float = 0.0

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(d.size for d in self.domains)


def build_model(unary, pairwise=None, domains=None) -> EnergyModel:
    """Assemble an EnergyModel from raw tables.

    Parameters
    ----------
    unary : sequence of 1-D array-likes (one per variable)
    pairwise : mapping {(i, j): 2-D array-like} with i != j, or None
    domains : optional list of label sequences; defaults to range(m_i)

    Every table is shifted so its minimum is exactly zero; the subtracted
    minima are summed into ``model.shift``.  Raises ValueError on shape
    mismatches, non-finite entries, or bad pair indices.
    """
    unary_arrays = [np.asarray(u, dtype=float).copy() for u in unary]
    n = len(unary_arrays)
    if n == 0:
        raise ValueError("model needs at least one variable")
    for i, u in enumerate(unary_arrays):
        if u.ndim != 1 or u.size == 0:
            raise ValueError(f"unary table {i} must be a nonempty vector")
        if not np.all(np.isfinite(u)):
            raise ValueError(f"unary table {i} has non-finite entries")

    if domains is None:
        domains = [tuple(range(u.size)) for u in unary_arrays]
    else:
        domains = [tuple(d) for d in domains]
        if len(domains) != n:
            raise ValueError("domains and unary tables disagree on variable count")
        for i, (d, u) in enumerate(zip(domains, unary_arrays)):
            if len(d) != u.size:
                raise ValueError(
                    f"variable {i}: domain size {len(d)} != unary length {u.size}"
                )
            if len(set(d)) != len(d):
                raise ValueError(f"variable {i}: duplicate labels in domain")

    sizes = [u.size for u in unary_arrays]
    pair_arrays: dict[tuple[int, int], np.ndarray] = {}
    for key, table in (pairwise or {}).items():
        i, j = key
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError(f"bad pair key {key!r}")
        t = np.asarray(table, dtype=float).copy()
        if t.shape != (sizes[i], sizes[j]):
            raise ValueError(
                f"pair table {key!r} has shape {t.shape}, expected {(sizes[i], sizes[j])}"
            )
        if not np.all(np.isfinite(t)):
            raise ValueError(f"pair table {key!r} has non-finite entries")
        pair_arrays[(i, j)] = t

    shift = 0.0
    for u in unary_arrays:
        m = float(u.min())
        u -= m
        shift += m
    for t in pair_arrays.values():
        m = float(t.min())
        t -= m
        shift += m

    return EnergyModel(
        domains=[DiscreteDomain(values=d) for d in domains],
        unary=unary_arrays,
        pairwise=pair_arrays,
        shift=shift,
    )


def evaluate(model: EnergyModel, assignment) -> float:
    """Total energy of a full assignment (tuple of label indices)."""
    x = np.asarray(assignment, dtype=int)
    if x.shape != (model.n,):
        raise ValueError(f"assignment length {x.size} != {model.n} variables")
    for i, (xi, m) in enumerate(zip(x, model.sizes)):
        if not 0 <= xi < m:
            raise ValueError(f"variable {i}: index {xi} outside domain of size {m}")
    total = model.shift
    for i in range(model.n):
        total += model.unary[i][x[i]]
    for (i, j), table in model.pairwise.items():
        total += table[x[i], x[j]]
    return float(total)


@dataclass
class SubEnergy:
    """One variable's share of the model: its unary term plus the pair terms
    it owns.  ``neighborhood`` is the owner plus every j with an (i, j) table.
    """

    model: EnergyModel
    owner: int
    neighborhood: tuple[int, ...] = field(default=())

    def evaluate(self, assignment) -> float:
        x = np.asarray(assignment, dtype=int)
        i = self.owner
        total = float(self.model.unary[i][x[i]])
        for (a, j), table in self.model.pairwise.items():
            if a == i:
                total += table[x[i], x[j]]
        return total


def decompose(model: EnergyModel) -> list[SubEnergy]:
    """Split the model into per-variable sub-energies.

    The sub-energies sum to the total energy minus ``model.shift`` on every
    assignment (ownership: pair (i, j) belongs to variable i).
    """
    subs = []
    for i in range(model.n):
        nb = {i}
        for (a, j) in model.pairwise:
            if a == i:
                nb.add(j)
        subs.append(SubEnergy(model=model, owner=i, neighborhood=tuple(sorted(nb))))
    return subs
