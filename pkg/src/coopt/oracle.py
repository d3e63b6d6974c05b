"""Reference oracles: exhaustive enumeration and a tridiagonal eigensolver.

These are deliberately independent of the solver modules — they share the
model/grid data types but none of the update code — so they can act as
ground truth in tests and in the ``compare`` report path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .model import EnergyModel

MAX_ENUMERATION = 10_000_000
LANDSCAPE_VARS = 4

EIG_TOL = 1e-10
EIG_MAX_ITERS = 500


@dataclass
class EnumerationResult:
    assignment: tuple[int, ...]
    energy: float
    visited: int
    landscape: np.ndarray | None = None


def _decode(ranks: np.ndarray, sizes) -> np.ndarray:
    """Mixed-radix decode of lexicographic ranks into index columns."""
    n = len(sizes)
    out = np.empty((ranks.size, n), dtype=np.int64)
    stride = 1
    for i in range(n - 1, -1, -1):
        out[:, i] = (ranks // stride) % sizes[i]
        stride *= sizes[i]
    return out


def _chunk_energy(model: EnergyModel, idx: np.ndarray) -> np.ndarray:
    e = np.full(idx.shape[0], model.shift)
    for i in range(model.n):
        e += model.unary[i][idx[:, i]]
    for (i, j), table in model.pairwise.items():
        e += table[idx[:, i], idx[:, j]]
    return e


def enumerate_model(model: EnergyModel, chunk: int = 1 << 18) -> EnumerationResult:
    """Visit every assignment and return the exact minimizer.

    Ties break toward the lexicographically smallest assignment.  Instances
    with more than ``MAX_ENUMERATION`` assignments are rejected.  For models
    with at most LANDSCAPE_VARS variables the full energy vector (in
    lexicographic order) is attached as ``landscape``.
    """
    sizes = model.sizes
    total = 1
    for m in sizes:
        total *= m
    if total > MAX_ENUMERATION:
        raise ValueError(f"instance too large to enumerate ({total} assignments)")

    keep = model.n <= LANDSCAPE_VARS
    landscape = np.empty(total) if keep else None
    best_val = np.inf
    best_rank = -1
    visited = 0
    for start in range(0, total, chunk):
        ranks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        energies = _chunk_energy(model, _decode(ranks, sizes))
        if keep:
            landscape[start : start + ranks.size] = energies
        k = int(np.argmin(energies))
        if energies[k] < best_val:
            best_val = float(energies[k])
            best_rank = int(ranks[k])
        visited += ranks.size

    assignment = tuple(int(v) for v in _decode(np.array([best_rank]), sizes)[0])
    return EnumerationResult(
        assignment=assignment, energy=best_val, visited=visited, landscape=landscape
    )


def energy_landscape(model: EnergyModel) -> tuple[np.ndarray, np.ndarray]:
    """All assignments (as an index matrix, lexicographic order) and their
    energies.  Intended for small instances in tests and experiments."""
    sizes = model.sizes
    total = 1
    for m in sizes:
        total *= m
    if total > MAX_ENUMERATION:
        raise ValueError(f"instance too large to enumerate ({total} assignments)")
    idx = _decode(np.arange(total, dtype=np.int64), sizes)
    return idx, _chunk_energy(model, idx)


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    residual: float
    iterations: int
    converged: bool


def ground_eig(potential, grid, mass: float, hbar: float) -> EigenResult:
    """Lowest eigenpair of H = -(hbar^2 / 2 mass) d2/dx2 + V on a uniform grid.

    Second-order central differences with Dirichlet walls.  Uses inverse-power
    iteration with a Gershgorin shift; only tridiagonal solves are needed.
    The eigenvector is sign-fixed (sum >= 0) and quadrature-normalized so that
    h * sum(v^2) = 1.

    Parameters
    ----------
    potential : array of V values on the grid nodes
    grid : object with ``xs`` (nodes) and ``h`` (spacing); see continuous.Grid1D
    mass, hbar : positive scalars
    """
    v_vals = np.asarray(potential, dtype=float)
    h = grid.h
    npts = v_vals.size
    if npts != grid.n:
        raise ValueError("potential length does not match grid")
    if mass <= 0 or hbar <= 0:
        raise ValueError("mass and hbar must be positive")

    kin = hbar * hbar / (2.0 * mass * h * h)
    diag = 2.0 * kin + v_vals
    off = -kin

    # Gershgorin lower bound keeps (H - shift I) positive definite.
    shift = float(np.min(diag) - 2.0 * abs(off)) - 1e-9 * max(1.0, abs(off))

    ab = np.zeros((3, npts))
    ab[0, 1:] = off
    ab[1, :] = diag - shift
    ab[2, :-1] = off

    def apply_h(vec):
        out = diag * vec
        out[:-1] += off * vec[1:]
        out[1:] += off * vec[:-1]
        return out

    vec = np.ones(npts) / np.sqrt(npts)
    lam = float(vec @ apply_h(vec))
    converged = False
    iterations = 0
    for iterations in range(1, EIG_MAX_ITERS + 1):
        vec = solve_banded((1, 1), ab, vec)
        vec /= np.linalg.norm(vec)
        lam_new = float(vec @ apply_h(vec))
        if abs(lam_new - lam) <= EIG_TOL:
            lam = lam_new
            converged = True
            break
        lam = lam_new

    if vec.sum() < 0:
        vec = -vec
    vec = vec / np.sqrt(h * float(vec @ vec))
    residual = float(np.linalg.norm(apply_h(vec) - lam * vec) * np.sqrt(h))
    return EigenResult(
        value=lam, vector=vec, residual=residual, iterations=iterations, converged=converged
    )
