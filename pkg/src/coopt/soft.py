"""Soft assignments: exponentiated cooperative updates on probability-like
tables.

``maxproduct_update`` is the exponential image of the offset bound recursion:
psi_i = exp(-Psi_i / hbar) with each table rescaled to max 1.  The sum-product
variant replaces the max over neighbor labels with a sum against the squared
table and renormalizes to unit squared mass, which makes the tables behave
like discrete wavefunctions.

Updates run in the log domain whenever hbar < LOG_DOMAIN_HBAR, because
exp(-e / hbar) underflows double precision once e / hbar exceeds ~745.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .model import EnergyModel

LOG_DOMAIN_HBAR = 0.1
SUMPRODUCT_POWER = 2  # soft tables enter sum-product coupling as psi^2


class SoftUnderflowError(ArithmeticError):
    """An update produced an all-zero table (energies too large for hbar)."""


@dataclass
class SoftAssignment:
    """Per-variable soft tables at iteration t.

    ``z`` holds the most recent normalization factors: the max of the raw
    table for max-product, the squared mass of the raw table for sum-product
    and ``normalize``.  May be inf/0 when hbar is small enough that the raw
    scale leaves double range; the tables themselves stay finite.
    """

    tables: list[np.ndarray]
    hbar: float
    t: int = 0
    z: np.ndarray | None = None

    def copy(self) -> "SoftAssignment":
        return SoftAssignment(
            tables=[t.copy() for t in self.tables],
            hbar=self.hbar,
            t=self.t,
            z=None if self.z is None else self.z.copy(),
        )


def uniform_soft(model: EnergyModel, hbar: float = 1.0,
                 mode: str = "sumprod") -> SoftAssignment:
    """Flat starting tables: unit squared mass for sum-product, max 1 for
    max-product."""
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    if mode == "sumprod":
        tables = [np.full(m, 1.0 / np.sqrt(m)) for m in model.sizes]
    elif mode == "maxprod":
        tables = [np.ones(m) for m in model.sizes]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SoftAssignment(tables=tables, hbar=hbar, t=0)


def _log_tables(tables) -> list[np.ndarray]:
    with np.errstate(divide="ignore"):
        return [np.log(t) for t in tables]


def maxproduct_update(soft: SoftAssignment, model: EnergyModel,
                      alpha: float = 1.0) -> SoftAssignment:
    """psi_i(x_i) <- exp(-e_i/h) * prod_{j!=i} max_xj exp(-e_ij/h) psi_j^alpha,
    rescaled so each new table has max exactly 1.

    -hbar * log of the result reproduces the offset bound update applied to
    -hbar * log psi, entrywise.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    hbar = soft.hbar
    n = model.n
    old = soft.tables
    new_tables = []
    zs = np.empty(n)

    if hbar < LOG_DOMAIN_HBAR:
        logs = _log_tables(old)
        for i in range(n):
            score = model.unary[i].copy()
            for j in range(n):
                if j == i:
                    continue
                coupled = -hbar * alpha * logs[j]
                table = model.pairwise.get((i, j))
                if table is not None:
                    score = score + np.min(table + coupled[None, :], axis=1)
                else:
                    score = score + coupled.min()
            z = score.min()
            new_tables.append(np.exp(-(score - z) / hbar))
            with np.errstate(over="ignore"):
                zs[i] = np.exp(-z / hbar)  # matches the direct path's peak
    else:
        for i in range(n):
            raw = np.exp(-model.unary[i] / hbar)
            for j in range(n):
                if j == i:
                    continue
                powered = old[j] ** alpha
                table = model.pairwise.get((i, j))
                if table is not None:
                    raw = raw * np.max(np.exp(-table / hbar) * powered[None, :], axis=1)
                else:
                    raw = raw * powered.max()
            peak = raw.max()
            if peak <= 0.0 or not np.isfinite(peak):
                raise SoftUnderflowError(
                    f"max-product table {i} left double range (peak {peak}); "
                    f"hbar={hbar} is too small for these energies"
                )
            new_tables.append(raw / peak)
            zs[i] = peak

    return SoftAssignment(tables=new_tables, hbar=hbar, t=soft.t + 1, z=zs)


def sumproduct_update(soft: SoftAssignment, model: EnergyModel) -> SoftAssignment:
    """psi_i(x_i) <- exp(-e_i/h) * prod_{j!=i} sum_xj exp(-e_ij/h) psi_j^2,
    renormalized to unit squared mass; the pre-normalization squared mass is
    recorded as Z_i."""
    hbar = soft.hbar
    n = model.n
    old = soft.tables
    new_tables = []
    zs = np.empty(n)

    if hbar < LOG_DOMAIN_HBAR:
        logs = _log_tables(old)
        for i in range(n):
            lograw = -model.unary[i] / hbar
            for j in range(n):
                if j == i:
                    continue
                coupled = SUMPRODUCT_POWER * logs[j]
                table = model.pairwise.get((i, j))
                if table is not None:
                    lograw = lograw + logsumexp(-table / hbar + coupled[None, :], axis=1)
                else:
                    lograw = lograw + logsumexp(coupled)
            peak = lograw.max()
            if not np.isfinite(peak):
                raise SoftUnderflowError(f"sum-product table {i} has no finite entries")
            log_mass = logsumexp(2.0 * (lograw - peak))
            new_tables.append(np.exp(lograw - peak - 0.5 * log_mass))
            with np.errstate(over="ignore"):
                zs[i] = np.exp(2.0 * peak + log_mass)
    else:
        for i in range(n):
            raw = np.exp(-model.unary[i] / hbar)
            for j in range(n):
                if j == i:
                    continue
                sq = old[j] ** SUMPRODUCT_POWER
                table = model.pairwise.get((i, j))
                if table is not None:
                    raw = raw * (np.exp(-table / hbar) @ sq)
                else:
                    raw = raw * sq.sum()
            mass = float(raw @ raw)
            if mass <= 0.0 or not np.isfinite(mass):
                raise SoftUnderflowError(
                    f"sum-product table {i} left double range (mass {mass}); "
                    f"hbar={hbar} is too small for these energies"
                )
            new_tables.append(raw / np.sqrt(mass))
            zs[i] = mass

    return SoftAssignment(tables=new_tables, hbar=hbar, t=soft.t + 1, z=zs)


def normalize(soft: SoftAssignment) -> SoftAssignment:
    """Scale each table to unit squared mass, recording the prior squared
    mass in ``z``.  Raises on an all-zero table."""
    tables = []
    zs = np.empty(len(soft.tables))
    for i, t in enumerate(soft.tables):
        mass = float(t @ t)
        if mass <= 0.0 or not np.isfinite(mass):
            raise SoftUnderflowError(f"cannot normalize table {i} with squared mass {mass}")
        tables.append(t / np.sqrt(mass))
        zs[i] = mass
    return SoftAssignment(tables=tables, hbar=soft.hbar, t=soft.t, z=zs)


def extract_decision(soft: SoftAssignment) -> np.ndarray:
    """Per-table argmax of psi^2; ties go to the lowest label index."""
    return np.array([int(np.argmax(t * t)) for t in soft.tables], dtype=int)


@dataclass
class SoftReport:
    mode: str
    converged: bool
    iterations: int
    trace: list[tuple[int, float]] = field(default_factory=list)
    soft: SoftAssignment | None = None
    decision: np.ndarray | None = None


CONSECUTIVE_HITS = 3


def solve_soft(model: EnergyModel, mode: str = "sumprod", hbar: float = 1.0,
               alpha: float = 1.0, tol: float = 1e-9, max_iters: int = 500,
               initial: SoftAssignment | None = None) -> SoftReport:
    """Iterate max-product or sum-product updates to a fixed point.

    Stops once the max entrywise change stays at or below ``tol`` for three
    consecutive iterations; the trace records (iteration, change).
    """
    if mode not in ("maxprod", "sumprod"):
        raise ValueError(f"unknown mode {mode!r}")
    soft = initial.copy() if initial is not None else uniform_soft(model, hbar, mode)

    trace: list[tuple[int, float]] = []
    hits = 0
    converged = False
    for step in range(1, max_iters + 1):
        if mode == "maxprod":
            new_soft = maxproduct_update(soft, model, alpha)
        else:
            new_soft = sumproduct_update(soft, model)
        delta = max(
            float(np.max(np.abs(a - b)))
            for a, b in zip(new_soft.tables, soft.tables)
        )
        soft = new_soft
        trace.append((step, delta))
        hits = hits + 1 if delta <= tol else 0
        if hits >= CONSECUTIVE_HITS:
            converged = True
            break

    return SoftReport(
        mode=mode,
        converged=converged,
        iterations=soft.t,
        trace=trace,
        soft=soft,
        decision=extract_decision(soft),
    )
