"""Mean-field phases and symmetry transmission for rigid liquid-crystal molecules."""

from .kernel import KernelCoeffs, discriminant, eval_kernel
from .so3 import EulerAngles, QuadratureGrid, build_grid, euler_to_rotation, integrate, relative_orientation
from .solver import SolutionReport, SolverConfig, iterate, multi_start_solve
from .state import MomentState
from .symmetry import c_min, commutator_norm, shared_eigenframe, theorem1_applies

__all__ = [
    "EulerAngles",
    "KernelCoeffs",
    "MomentState",
    "QuadratureGrid",
    "SolutionReport",
    "SolverConfig",
    "build_grid",
    "c_min",
    "commutator_norm",
    "discriminant",
    "euler_to_rotation",
    "eval_kernel",
    "integrate",
    "iterate",
    "multi_start_solve",
    "relative_orientation",
    "shared_eigenframe",
    "theorem1_applies",
]
