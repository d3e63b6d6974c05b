"""Grid relaxation of coupled continuous fields toward mean-field ground
states.

Each particle i carries a nonnegative field psi_i on a shared uniform 1-D
grid with Dirichlet walls (fields vanish off-grid) and unit quadrature mass
h * sum(psi^2) = 1.  Two integrators drive the fields toward the lowest
eigenstate of the effective Hamiltonian

    H_i = -(hbar * sigma_i^2 / 2) d2/dx2 + V_i,
    V_i(x) = e_i(x) + sum_{j != i} integral e_ij(x, y) psi_j(y)^2 dy:

``kernel_step``   multiply by the pairwise-factored decay weights for one
                  time slice, then smooth with a discrete Gaussian kernel
``euler_step``    explicit first-order step of the diffusion + decay flow

Both renormalize every step, which absorbs the otherwise-divergent overall
scale; the stationary field then satisfies H_i psi_i = E_i psi_i with E_i
recovered as a Rayleigh quotient.  The default diffusion scale is
sigma_i^2 = hbar / m_i, which turns the stationarity condition into the
time-independent Schroedinger equation for mass m_i.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ive

from .model import CooptError
from .oracle import ground_eig
from .util import worker_count

KERNEL_RATE_LIMIT = 0.1      # dt * max|V| / hbar allowed for kernel_step
EULER_DIFFUSION_LIMIT = 0.25  # dt * sigma^2 / h^2 allowed for euler_step
STENCIL = np.array([1.0, -2.0, 1.0])


class StabilityError(CooptError):
    """A step size violates an integrator's stability bound."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [x_min, x_max] with n nodes, spacing h."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 nodes")
        if not self.x_max > self.x_min:
            raise ValueError("grid needs x_max > x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)


@dataclass
class ContinuousProblem:
    """Masses plus unary/pairwise potential callables.

    ``unary[i]`` maps x-arrays to energies; ``pairs[(i, j)]`` maps broadcast
    (x, y) arrays to interaction energies and is owned by particle i.
    """

    masses: np.ndarray
    unary: list
    pairs: dict[tuple[int, int], object] = field(default_factory=dict)
    hbar: float = 1.0

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.ndim != 1 or self.masses.size == 0:
            raise ValueError("masses must be a nonempty vector")
        if np.any(self.masses <= 0):
            raise ValueError("masses must be positive")
        if len(self.unary) != self.masses.size:
            raise ValueError("one unary potential per particle required")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        for (i, j) in self.pairs:
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise ValueError(f"bad pair key {(i, j)!r}")

    @property
    def n(self) -> int:
        return self.masses.size


@dataclass
class GridField:
    """Per-particle fields on a shared grid; rows keep h * sum(psi^2) = 1."""

    psi: np.ndarray
    grid: Grid1D
    t: float = 0.0

    def copy(self) -> "GridField":
        return GridField(psi=self.psi.copy(), grid=self.grid, t=self.t)


def _normalize_rows(psi: np.ndarray, h: float) -> np.ndarray:
    mass = h * np.sum(psi * psi, axis=1, keepdims=True)
    if np.any(mass <= 0) or not np.all(np.isfinite(mass)):
        raise ArithmeticError("field has a row with zero or non-finite mass")
    return psi / np.sqrt(mass)


def uniform_field(problem: ContinuousProblem, grid: Grid1D) -> GridField:
    psi = np.ones((problem.n, grid.n))
    return GridField(psi=_normalize_rows(psi, grid.h), grid=grid)


def point_field(problem: ContinuousProblem, grid: Grid1D, positions) -> GridField:
    """One-hot field with all quadrature mass on the node nearest each
    position."""
    positions = np.broadcast_to(np.asarray(positions, dtype=float), (problem.n,))
    psi = np.zeros((problem.n, grid.n))
    xs = grid.xs
    for i, pos in enumerate(positions):
        psi[i, int(np.argmin(np.abs(xs - pos)))] = 1.0
    return GridField(psi=_normalize_rows(psi, grid.h), grid=grid)


@dataclass
class Kernel:
    """Discrete Gaussian smoothing weights for one time slice.

    ``taps[i]`` is the grid heat kernel exp(-theta) I_k(theta) with
    theta = sigma_i^2 dt / h^2 (modified Bessel I), whose grid variance is
    exactly sigma_i^2 dt for every step size — including sub-grid smoothing
    widths, where point-sampling a Gaussian would degenerate to a single tap.
    Taps are truncated once negligible and renormalized to unit sum.
    sigma_i = 0 yields the identity kernel (no smoothing).
    """

    sigma: np.ndarray
    dt: float
    taps: list[np.ndarray]


def make_kernel(sigmas, dt: float, h: float) -> Kernel:
    sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
    if dt <= 0:
        raise ValueError("dt must be positive")
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    if np.any(sigmas < 0):
        raise ValueError("sigma must be nonnegative")
    taps = []
    for sig in sigmas:
        theta = sig * sig * dt / (h * h)
        if theta == 0.0:
            taps.append(np.array([1.0]))
            continue
        # 6-sigma support in grid units, padded so the discarded Bessel tail
        # cannot bias the kernel variance.
        radius = int(np.ceil(6.0 * np.sqrt(theta))) + 3
        weights = ive(np.arange(-radius, radius + 1), theta)
        weights = weights / weights.sum()
        taps.append(weights)
    return Kernel(sigma=sigmas, dt=dt, taps=taps)


def default_sigmas(problem: ContinuousProblem, hbar: float) -> np.ndarray:
    return np.sqrt(hbar / problem.masses)


def _unary_values(problem: ContinuousProblem, grid: Grid1D) -> np.ndarray:
    xs = grid.xs
    vals = np.empty((problem.n, grid.n))
    for i, pot in enumerate(problem.unary):
        vals[i] = np.asarray(pot(xs), dtype=float)
    return vals


def _pair_values(problem: ContinuousProblem, grid: Grid1D) -> dict:
    xs = grid.xs
    return {
        key: np.asarray(pot(xs[:, None], xs[None, :]), dtype=float)
        for key, pot in problem.pairs.items()
    }


def potential_bound(problem: ContinuousProblem, grid: Grid1D) -> float:
    """Field-independent upper bound on max |V_i| over the grid (all energies
    are assumed nonnegative on the grid; validated here)."""
    unary = _unary_values(problem, grid)
    pairs = _pair_values(problem, grid)
    if np.any(unary < 0) or any(np.any(p < 0) for p in pairs.values()):
        raise ValueError("potentials must be nonnegative on the grid")
    bound = 0.0
    for i in range(problem.n):
        b = float(unary[i].max())
        for (a, _j), table in pairs.items():
            if a == i:
                b += float(table.max())
        bound = max(bound, b)
    return bound


def build_potential(field: GridField, problem: ContinuousProblem) -> np.ndarray:
    """Effective per-particle potential V_i(x) = e_i(x) + sum_j quadrature of
    e_ij(x, y) against psi_j(y)^2.  Returns an (n, N) array."""
    grid = field.grid
    v = _unary_values(problem, grid)
    pairs = _pair_values(problem, grid)
    sq = field.psi * field.psi
    for (i, j), table in pairs.items():
        v[i] += grid.h * (table @ sq[j])
    return v


def integral_update(field: GridField, problem: ContinuousProblem,
                    hbar: float | None = None) -> GridField:
    """One sweep of the stationary integral map:

        psi_i(x) <- exp(-e_i(x)/hbar) * prod_j [ integral exp(-e_ij(x,y)/hbar)
                    psi_j(y)^2 dy ],  then quadrature-normalize.

    The right-hand side has no memory of psi_i itself, so with no pair terms
    a single sweep lands exactly on exp(-e_i/hbar) up to normalization.
    """
    hbar = problem.hbar if hbar is None else hbar
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    grid = field.grid
    unary = _unary_values(problem, grid)
    pairs = _pair_values(problem, grid)
    sq = field.psi * field.psi
    new = np.exp(-unary / hbar)
    for (i, j), table in pairs.items():
        new[i] *= grid.h * (np.exp(-table / hbar) @ sq[j])
    if np.any(new.sum(axis=1) == 0.0):
        raise ArithmeticError(
            f"integral update underflowed to an all-zero field (hbar={hbar})"
        )
    return GridField(psi=_normalize_rows(new, grid.h), grid=grid, t=field.t)


class _Stepper:
    """Precomputed per-run tables for repeated stepping."""

    def __init__(self, problem: ContinuousProblem, grid: Grid1D, kernel: Kernel,
                 hbar: float, integrator: str):
        if kernel.sigma.size != problem.n:
            raise ValueError("kernel must carry one sigma per particle")
        self.problem = problem
        self.grid = grid
        self.kernel = kernel
        self.hbar = hbar
        self.integrator = integrator
        self.unary = _unary_values(problem, grid)
        self.pairs = _pair_values(problem, grid)
        dt = kernel.dt
        if integrator == "kernel":
            self.decay = np.exp(-dt * self.unary / hbar)
            self.pair_decay = {k: np.exp(-dt * t / hbar) for k, t in self.pairs.items()}
        elif integrator != "euler":
            raise ValueError(f"unknown integrator {integrator!r}")
        self.workers = worker_count(problem.n)

    def check_stability(self):
        dt = self.kernel.dt
        if self.integrator == "kernel":
            bound = potential_bound(self.problem, self.grid)
            rate = dt * bound / self.hbar
            if rate > KERNEL_RATE_LIMIT * (1 + 1e-12):
                raise StabilityError(
                    f"kernel step too coarse: dt * max|V| / hbar = {rate:.4g} "
                    f"exceeds {KERNEL_RATE_LIMIT} (dt={dt:.4g}, max|V|<={bound:.4g})"
                )
        else:
            h = self.grid.h
            sig2 = float(np.max(self.kernel.sigma ** 2))
            if dt * sig2 > EULER_DIFFUSION_LIMIT * h * h * (1 + 1e-12):
                raise StabilityError(
                    f"euler step unstable: dt = {dt:.4g} exceeds "
                    f"{EULER_DIFFUSION_LIMIT} * h^2 / sigma^2 = "
                    f"{EULER_DIFFUSION_LIMIT * h * h / sig2:.4g}"
                )

    def _kernel_row(self, i: int, psi: np.ndarray, sq: np.ndarray) -> np.ndarray:
        g = psi[i] * self.decay[i]
        for (a, j), table in self.pair_decay.items():
            if a == i:
                g = g * (self.grid.h * (table @ sq[j]))
        taps = self.kernel.taps[i]
        if taps.size > 1:
            # centered window of the full convolution; np.convolve's "same"
            # would return the wrong length once taps outgrow the grid
            radius = (taps.size - 1) // 2
            g = np.convolve(g, taps, mode="full")[radius:radius + g.size]
        return g

    def _euler_row(self, i: int, psi: np.ndarray, v: np.ndarray) -> np.ndarray:
        h = self.grid.h
        dt = self.kernel.dt
        sig2 = self.kernel.sigma[i] ** 2
        lap = np.convolve(psi[i], STENCIL, mode="same") / (h * h)
        return psi[i] + dt * (0.5 * sig2 * lap - v[i] * psi[i] / self.hbar)

    def step(self, psi: np.ndarray) -> np.ndarray:
        n = self.problem.n
        if self.integrator == "kernel":
            sq = psi * psi
            rows = self._map(lambda i: self._kernel_row(i, psi, sq), n)
        else:
            v = self.unary.copy()
            sq = psi * psi
            for (i, j), table in self.pairs.items():
                v[i] += self.grid.h * (table @ sq[j])
            rows = self._map(lambda i: self._euler_row(i, psi, v), n)
        return _normalize_rows(np.stack(rows), self.grid.h)

    def _map(self, fn, n: int):
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(fn, range(n)))
        return [fn(i) for i in range(n)]


def kernel_step(field: GridField, problem: ContinuousProblem, kernel: Kernel,
                hbar: float | None = None) -> GridField:
    """One smoothed decay step:

        psi_i <- normalize( taps_i * [ psi_i * exp(-dt e_i/hbar) *
                 prod_j quadrature(exp(-dt e_ij(x,y)/hbar) psi_j(y)^2) ] )

    (* is zero-padded convolution).  Requires dt * max|V| / hbar <= 0.1.
    A one-hot field is an exact fixed point when sigma = 0: the pointwise
    factors rescale the lone spike and normalization undoes the rescale.
    """
    hbar = problem.hbar if hbar is None else hbar
    stepper = _Stepper(problem, field.grid, kernel, hbar, "kernel")
    stepper.check_stability()
    return GridField(psi=stepper.step(field.psi), grid=field.grid,
                     t=field.t + kernel.dt)


def euler_step(field: GridField, potential: np.ndarray,
               problem: ContinuousProblem, kernel: Kernel,
               hbar: float | None = None) -> GridField:
    """Explicit step psi <- normalize(psi + dt [ (sigma^2/2) psi'' - V psi / hbar ])
    with the second derivative from central differences and Dirichlet walls.
    Requires dt <= 0.25 h^2 / max sigma^2.  ``potential`` is the (n, N) array
    from build_potential (recomputed by the caller as fields evolve)."""
    hbar = problem.hbar if hbar is None else hbar
    stepper = _Stepper(problem, field.grid, kernel, hbar, "euler")
    stepper.check_stability()
    v = np.asarray(potential, dtype=float)
    if v.shape != field.psi.shape:
        raise ValueError(f"potential shape {v.shape} != field shape {field.psi.shape}")
    rows = [stepper._euler_row(i, field.psi, v) for i in range(problem.n)]
    return GridField(psi=_normalize_rows(np.stack(rows), field.grid.h),
                     grid=field.grid, t=field.t + kernel.dt)


@dataclass
class StationaryResult:
    energies: np.ndarray
    residuals: np.ndarray
    converged: bool
    iterations: int


def _rayleigh(field: GridField, problem: ContinuousProblem, sigmas: np.ndarray,
              hbar: float) -> tuple[np.ndarray, np.ndarray]:
    grid = field.grid
    h = grid.h
    v = build_potential(field, problem)
    energies = np.empty(problem.n)
    residuals = np.empty(problem.n)
    for i in range(problem.n):
        psi = field.psi[i]
        lap = np.convolve(psi, STENCIL, mode="same") / (h * h)
        h_psi = -0.5 * hbar * sigmas[i] ** 2 * lap + v[i] * psi
        norm2 = float(psi @ psi)
        energies[i] = float(psi @ h_psi) / norm2
        residuals[i] = float(np.linalg.norm(h_psi - energies[i] * psi)) * np.sqrt(h)
    return energies, residuals


def default_dt(problem: ContinuousProblem, grid: Grid1D, hbar: float,
               integrator: str, sigmas: np.ndarray) -> float:
    sig2 = float(np.max(sigmas ** 2))
    diffusion_cap = grid.h * grid.h / sig2 if sig2 > 0 else np.inf
    if integrator == "euler":
        return 0.2 * grid.h * grid.h / sig2
    bound = potential_bound(problem, grid)
    rate_cap = 0.05 * hbar / bound if bound > 0 else np.inf
    dt = min(rate_cap, diffusion_cap)
    if not np.isfinite(dt):
        raise ValueError("cannot pick a default dt for a free massless system")
    return dt


def solve_ground(problem: ContinuousProblem, grid: Grid1D, dt: float | None = None,
                 hbar: float | None = None, tol: float = 1e-6,
                 max_iters: int = 200_000, integrator: str = "euler",
                 sigmas=None, initial: GridField | None = None,
                 on_step=None) -> tuple[GridField, StationaryResult]:
    """Relax fields to the stationary point of the chosen integrator.

    Stops when the sup-norm change of one step drops to tol * dt (a rate
    criterion, so halving dt does not loosen it).  Final energies are
    Rayleigh quotients of H_i = -(hbar sigma_i^2 / 2) d2/dx2 + V_i at the
    converged coupling, and residuals are quadrature norms of
    H_i psi_i - E_i psi_i.  ``on_step(step, delta)`` is invoked once per
    iteration when provided.
    """
    hbar = problem.hbar if hbar is None else hbar
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    if integrator not in ("kernel", "euler"):
        raise ValueError(f"unknown integrator {integrator!r}")
    sigmas = default_sigmas(problem, hbar) if sigmas is None else \
        np.broadcast_to(np.asarray(sigmas, dtype=float), (problem.n,)).copy()
    if dt is None:
        dt = default_dt(problem, grid, hbar, integrator, sigmas)
    kernel = make_kernel(sigmas, dt, grid.h)

    stepper = _Stepper(problem, grid, kernel, hbar, integrator)
    stepper.check_stability()

    field = initial.copy() if initial is not None else uniform_field(problem, grid)
    if field.psi.shape != (problem.n, grid.n):
        raise ValueError("initial field does not match problem/grid")

    threshold = tol * dt
    converged = False
    iterations = 0
    psi = field.psi
    for step in range(1, max_iters + 1):
        new_psi = stepper.step(psi)
        delta = float(np.max(np.abs(new_psi - psi)))
        psi = new_psi
        iterations = step
        if on_step is not None:
            on_step(step, delta)
        if delta <= threshold:
            converged = True
            break

    out = GridField(psi=psi, grid=grid, t=field.t + iterations * dt)
    energies, residuals = _rayleigh(out, problem, sigmas, hbar)
    return out, StationaryResult(
        energies=energies, residuals=residuals, converged=converged,
        iterations=iterations,
    )


def delta_trap_demo(problem: ContinuousProblem, grid: Grid1D, positions,
                    dt: float | None = None, hbar: float | None = None,
                    freeze_steps: int = 100, tol: float = 1e-6,
                    max_iters: int = 200_000) -> dict:
    """Reproduce the point-mass trap and its smoothing escape.

    Without smoothing (sigma = 0) a one-hot field is a stationary point of
    the decay step no matter where the spike sits, so the dynamics never
    move; the demo measures the largest per-step change over
    ``freeze_steps`` steps.  With the default smoothing kernel the same
    start diffuses away and relaxes to the ground state; the demo reports
    the final overlap of each field with the reference eigensolver's ground
    state for the converged effective potential.
    """
    hbar = problem.hbar if hbar is None else hbar
    sigmas = default_sigmas(problem, hbar)
    if dt is None:
        dt = default_dt(problem, grid, hbar, "kernel", sigmas)

    frozen = _Stepper(problem, grid, make_kernel(np.zeros(problem.n), dt, grid.h),
                      hbar, "kernel")
    frozen.check_stability()
    psi = point_field(problem, grid, positions).psi
    largest = 0.0
    for _ in range(freeze_steps):
        new_psi = frozen.step(psi)
        largest = max(largest, float(np.max(np.abs(new_psi - psi))))
        psi = new_psi

    start = point_field(problem, grid, positions)
    fieldout, result = solve_ground(
        problem, grid, dt=dt, hbar=hbar, tol=tol, max_iters=max_iters,
        integrator="kernel", initial=start,
    )
    v = build_potential(fieldout, problem)
    overlaps = []
    for i in range(problem.n):
        eig = ground_eig(v[i], grid, mass=hbar / sigmas[i] ** 2, hbar=hbar)
        overlaps.append(abs(grid.h * float(fieldout.psi[i] @ eig.vector)))

    return {
        "frozen_max_step_change": largest,
        "frozen_steps": freeze_steps,
        "escape_overlaps": overlaps,
        "escape_converged": result.converged,
        "escape_iterations": result.iterations,
        "dt": dt,
    }
