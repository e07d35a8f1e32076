"""Self-consistent moment equations of the quadratic-kernel free energy.

With the Boltzmann closure ``f = exp(-W) / Z`` the critical points of the
free energy are fixed points of a map on the moments (p, Q1, Q2).  The map
is solved by damped Picard iteration from several starts, and each solution
is labelled by probing it with small perturbations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .kernel import KernelCoeffs
from .so3 import ConfigurationError, QuadratureGrid, build_grid, random_rotations
from .state import MomentState
from .symmetry import SymmetryReport, analyze

log = logging.getLogger(__name__)

STABILITY_LABELS = ("minimum-candidate", "saddle-candidate", "unknown")


class NumericalRangeError(ArithmeticError):
    """The mean-field potential is not finite on the grid."""


@dataclass(frozen=True)
class SolverConfig:
    grid: tuple[int, int, int] = (32, 48, 48)
    damping: float = 0.5
    tol_res: float = 1e-10
    max_iter: int = 20000
    n_starts: int = 4
    seed: int = 0
    probe_delta: float = 0.05
    n_probes: int = 3
    dedup_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ConfigurationError(f"damping must lie in (0, 1], got {self.damping}")
        if not self.tol_res > 0.0:
            raise ConfigurationError(f"tol_res must be positive, got {self.tol_res}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.n_starts < 1:
            raise ConfigurationError(f"n_starts must be >= 1, got {self.n_starts}")
        if len(self.grid) != 3 or min(self.grid) < 2:
            raise ConfigurationError(f"grid sizes must be three integers >= 2, got {self.grid}")


@dataclass(frozen=True)
class DensityField:
    """Per-node Boltzmann density; ``log_Z`` is kept in log form to survive large potentials."""

    values: np.ndarray
    log_values: np.ndarray
    log_Z: float

    @property
    def Z(self) -> float:
        return float(np.exp(self.log_Z))


@dataclass(frozen=True)
class SolutionReport:
    state: MomentState
    free_energy: float
    residual: float
    iterations: int
    converged: bool
    stability: str = "unknown"
    diagnostics: SymmetryReport | None = field(default=None, repr=False)

    def signature(self) -> np.ndarray:
        e1, e2 = self.state.eigvals()
        return np.concatenate([e1, e2, [self.state.p_norm, self.free_energy]])


_grid_cache: dict[tuple[int, int, int], QuadratureGrid] = {}


def get_grid(sizes) -> QuadratureGrid:
    sizes = tuple(int(s) for s in sizes)
    if sizes not in _grid_cache:
        _grid_cache[sizes] = build_grid(*sizes)
    return _grid_cache[sizes]


def potential_coefficients(coeffs: KernelCoeffs, state: MomentState) -> np.ndarray:
    """Coefficients of W against the grid feature columns ``[m1 | m1 m1 | m2 m2]``."""
    c1, c2, c3, c4 = coeffs.as_tuple()
    return np.concatenate(
        [
            c1 * state.p,
            (c2 * state.Q1 + c4 * state.Q2).ravel(),
            (c3 * state.Q2 + c4 * state.Q1).ravel(),
        ]
    )


def mean_field_potential(coeffs: KernelCoeffs, state: MomentState, P) -> np.ndarray | float:
    """W(P) = c1 p.m1 + (c2 Q1 + c4 Q2):m1 m1 + (c3 Q2 + c4 Q1):m2 m2 for one frame or a stack."""
    P = np.asarray(P, dtype=float)
    m1, m2 = P[..., 0, :], P[..., 1, :]
    c1, c2, c3, c4 = coeffs.as_tuple()
    A = c2 * state.Q1 + c4 * state.Q2
    B = c3 * state.Q2 + c4 * state.Q1
    W = (
        c1 * (m1 @ state.p)
        + np.einsum("...i,ij,...j->...", m1, A, m1)
        + np.einsum("...i,ij,...j->...", m2, B, m2)
    )
    return float(W) if np.ndim(W) == 0 else W


def _density_from_potential(grid: QuadratureGrid, W: np.ndarray) -> DensityField:
    if not np.all(np.isfinite(W)):
        raise NumericalRangeError("mean-field potential is not finite; coefficients are out of range")
    w_min = float(W.min())
    shifted = W - w_min
    e = np.exp(-shifted)
    z = float(grid.weights @ e)
    if not (np.isfinite(z) and z > 0.0):
        raise NumericalRangeError("partition function underflowed or overflowed")
    log_z = np.log(z)
    return DensityField(values=e / z, log_values=-shifted - log_z, log_Z=log_z - w_min)


def boltzmann_density(coeffs: KernelCoeffs, state: MomentState, grid: QuadratureGrid) -> DensityField:
    """f = exp(-W) / Z on the grid nodes, normalized by quadrature."""
    return _density_from_potential(grid, grid.features @ potential_coefficients(coeffs, state))


def _moment_vector(f: DensityField, grid: QuadratureGrid) -> np.ndarray:
    x = (grid.weights * f.values) @ grid.features
    for sl in (slice(3, 12), slice(12, 21)):
        Q = x[sl].reshape(3, 3)
        x[sl] = ((Q + Q.T) / 2).ravel()
    return x


def compute_moments(f: DensityField, grid: QuadratureGrid) -> MomentState:
    return MomentState.from_vector(_moment_vector(f, grid))


def fixed_point_map(coeffs: KernelCoeffs, state: MomentState, grid: QuadratureGrid) -> MomentState:
    return compute_moments(boltzmann_density(coeffs, state, grid), grid)


def interaction_energy(coeffs: KernelCoeffs, state: MomentState) -> float:
    c1, c2, c3, c4 = coeffs.as_tuple()
    return 0.5 * (
        c1 * float(state.p @ state.p)
        + c2 * float(np.sum(state.Q1 * state.Q1))
        + c3 * float(np.sum(state.Q2 * state.Q2))
        + 2.0 * c4 * float(np.sum(state.Q1 * state.Q2))
    )


def free_energy(coeffs: KernelCoeffs, state: MomentState, f: DensityField, grid: QuadratureGrid) -> float:
    """Entropy of f plus the pair energy evaluated on the moments of ``state``."""
    entropy = float(grid.weights @ (f.values * f.log_values))
    return entropy + interaction_energy(coeffs, state)


def iterate(
    coeffs: KernelCoeffs,
    init: MomentState,
    config: SolverConfig = SolverConfig(),
    grid: QuadratureGrid | None = None,
) -> SolutionReport:
    """Damped Picard iteration ``x <- (1 - damping) x + damping Phi(x)``.

    Stops once ``|Phi(x) - x| <= tol_res`` (Euclidean norm over p and the
    entries of Q1 and Q2).  The reported state is the last ``x`` whose
    residual was measured.  Failing to converge is reported, not raised.
    """
    grid = grid if grid is not None else get_grid(config.grid)
    feats = grid.features
    lam = config.damping
    x = init.to_vector()
    state = init
    residual = np.inf
    f = None
    it = 0
    for it in range(config.max_iter + 1):
        state = MomentState.from_vector(x)
        f = _density_from_potential(grid, feats @ potential_coefficients(coeffs, state))
        y = _moment_vector(f, grid)
        residual = float(np.linalg.norm(y - x))
        if residual <= config.tol_res or it == config.max_iter:
            break
        x = (1.0 - lam) * x + lam * y
    converged = residual <= config.tol_res
    if not converged:
        log.debug("no convergence after %d iterations (residual %.3e)", it, residual)
    return SolutionReport(
        state=state,
        free_energy=free_energy(coeffs, state, f, grid),
        residual=residual,
        iterations=it,
        converged=converged,
        diagnostics=analyze(state),
    )


def seed_state(rng: np.random.Generator, grid: QuadratureGrid) -> MomentState:
    """Moments of a randomly oriented, randomly biased density (always admissible)."""
    R = random_rotations(rng)
    n1, n2 = R[0], R[1]
    polar = rng.uniform(0.0, 2.0)
    s1 = rng.uniform(-8.0, 8.0)
    s2 = rng.uniform(-8.0, 8.0)
    a = np.concatenate(
        [-polar * n1, (-s1 * np.outer(n1, n1)).ravel(), (-s2 * np.outer(n2, n2)).ravel()]
    )
    return compute_moments(_density_from_potential(grid, grid.features @ a), grid)


def _probe_state(rng: np.random.Generator, base: SolutionReport, coeffs, delta: float, grid) -> MomentState:
    h = rng.standard_normal(21)
    h /= np.linalg.norm(h)
    W = grid.features @ (potential_coefficients(coeffs, base.state) + delta * h)
    return compute_moments(_density_from_potential(grid, W), grid)


def _same(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    return bool(np.max(np.abs(a - b)) <= tol)


def classify_stability(
    coeffs: KernelCoeffs,
    report: SolutionReport,
    config: SolverConfig = SolverConfig(),
    rng: np.random.Generator | None = None,
    grid: QuadratureGrid | None = None,
) -> str:
    """Perturb a converged solution and re-converge.

    ``saddle-candidate`` if some probe reaches a lower free energy,
    ``minimum-candidate`` if every probe returns to the same signature,
    ``unknown`` otherwise (including unconverged input).
    """
    if not report.converged:
        return "unknown"
    grid = grid if grid is not None else get_grid(config.grid)
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    sig = report.signature()
    f_tol = config.dedup_tol
    all_back = True
    for _ in range(config.n_probes):
        probe = iterate(coeffs, _probe_state(rng, report, coeffs, config.probe_delta, grid), config, grid)
        if probe.converged and probe.free_energy < report.free_energy - f_tol:
            return "saddle-candidate"
        if not (probe.converged and _same(probe.signature(), sig, config.dedup_tol)):
            all_back = False
    return "minimum-candidate" if all_back else "unknown"


def multi_start_solve(
    coeffs: KernelCoeffs,
    config: SolverConfig = SolverConfig(),
    classify: bool = True,
) -> list[SolutionReport]:
    """Solve from the isotropic state and ``n_starts - 1`` random seeds.

    Solutions are deduplicated on their rotation-invariant signature (sorted
    eigenvalues of Q1 and Q2, |p|, free energy), so copies related by a global
    rotation are reported once.  Converged solutions come first, by free energy.
    """
    grid = get_grid(config.grid)
    rng = np.random.default_rng(config.seed)
    inits = [MomentState.isotropic()] + [seed_state(rng, grid) for _ in range(config.n_starts - 1)]
    found: list[SolutionReport] = []
    for init in inits:
        rep = iterate(coeffs, init, config, grid)
        if any(r.converged == rep.converged and _same(r.signature(), rep.signature(), config.dedup_tol) for r in found):
            continue
        found.append(rep)
    found.sort(key=lambda r: (not r.converged, r.free_energy))
    if classify:
        found = [replace(r, stability=classify_stability(coeffs, r, config, rng, grid)) for r in found]
    return found
