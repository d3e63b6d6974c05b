"""Cooperative optimization: bound-tightening solvers, soft assignments,
grid ground-state relaxation, and independent oracles."""

from .continuous import (
    ContinuousProblem,
    Grid1D,
    GridField,
    Kernel,
    StabilityError,
    build_potential,
    delta_trap_demo,
    euler_step,
    integral_update,
    kernel_step,
    make_kernel,
    point_field,
    solve_ground,
    uniform_field,
)
from .discrete import (
    BoundProfile,
    Certificate,
    CoopConfig,
    alpha_update,
    certify,
    extract_assignment,
    general_update,
    offset_update,
    pairwise_update,
    solve_discrete,
    zero_profile,
)
from .model import (
    CooptError,
    DiscreteDomain,
    EnergyModel,
    ProblemFormatError,
    SubEnergy,
    build_model,
    decompose,
    evaluate,
)
from .oracle import enumerate_model, energy_landscape, ground_eig
from .soft import (
    SoftAssignment,
    SoftUnderflowError,
    maxproduct_update,
    normalize,
    solve_soft,
    sumproduct_update,
    uniform_soft,
)

__version__ = "0.1.0"

__all__ = [
    "BoundProfile",
    "Certificate",
    "ContinuousProblem",
    "CoopConfig",
    "CooptError",
    "DiscreteDomain",
    "EnergyModel",
    "Grid1D",
    "GridField",
    "Kernel",
    "ProblemFormatError",
    "SoftAssignment",
    "SoftUnderflowError",
    "StabilityError",
    "SubEnergy",
    "alpha_update",
    "build_model",
    "build_potential",
    "certify",
    "decompose",
    "delta_trap_demo",
    "energy_landscape",
    "enumerate_model",
    "euler_step",
    "evaluate",
    "extract_assignment",
    "general_update",
    "ground_eig",
    "integral_update",
    "kernel_step",
    "make_kernel",
    "maxproduct_update",
    "normalize",
    "offset_update",
    "pairwise_update",
    "point_field",
    "solve_discrete",
    "solve_ground",
    "solve_soft",
    "sumproduct_update",
    "uniform_field",
    "uniform_soft",
    "zero_profile",
]
