"""Diagnostics of phase symmetry from the moment tensors, and theorem applicability from coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import GROUP_TAGS
from .kernel import KernelCoeffs
from .state import MomentState

DEGENERACY_GAP = 1e-8
LABEL_TOL = 1e-6
_MIX = (math.sqrt(5.0) - 1.0) / 2.0

PHASES = ("isotropic", "uniaxial", "biaxial", "polar-uniaxial", "polar-biaxial", "unclassified")


def commutator_norm(Q1, Q2) -> float:
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    return float(np.linalg.norm(Q1 @ Q2 - Q2 @ Q1, "fro"))


def _clusters(vals: np.ndarray, gap: float) -> list[list[int]]:
    groups = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _blockwise_frame(A: np.ndarray, B: np.ndarray, gap: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(A)
    for block in _clusters(vals, gap):
        if len(block) > 1:
            V = vecs[:, block]
            _, U = np.linalg.eigh(V.T @ B @ V)
            vecs[:, block] = V @ U
    return vecs.T


def _max_offdiag(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - np.diag(np.diag(M)))))


def shared_eigenframe(Q1, Q2, tol: float = 1e-10, gap: float = DEGENERACY_GAP) -> np.ndarray | None:
    """Rotation R (rows are the frame axes) with R Q1 R^T and R Q2 R^T both diagonal.

    Q1 is diagonalized first and Q2 is diagonalized inside each degenerate
    eigenspace of Q1.  When a near-degeneracy makes that frame inaccurate, the
    same construction with the roles exchanged and the eigenframe of a generic
    combination of the two are tried as well.  Returns None if no candidate
    reaches ``tol``.
    """
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    Q1 = (Q1 + Q1.T) / 2
    Q2 = (Q2 + Q2.T) / 2
    candidates = (
        lambda: _blockwise_frame(Q1, Q2, gap),
        lambda: _blockwise_frame(Q2, Q1, gap),
        lambda: np.linalg.eigh(Q1 + _MIX * Q2)[1].T,
    )
    for make in candidates:
        R = make()
        if np.linalg.det(R) < 0:
            R[2] = -R[2]
        if max(_max_offdiag(R @ Q1 @ R.T), _max_offdiag(R @ Q2 @ R.T)) <= tol:
            return R
    return None


def _n_distinct(vals: np.ndarray, tol: float) -> int:
    return len(_clusters(np.sort(vals), tol))


def _is_eigvec(Q: np.ndarray, u: np.ndarray, tol: float) -> bool:
    v = Q @ u
    nv = np.linalg.norm(v)
    if nv <= tol:
        return True
    return float(np.linalg.norm(v - (u @ v) * u)) / nv <= tol


def p_alignment(state: MomentState, tol: float = LABEL_TOL) -> bool:
    """True if p vanishes or is an eigenvector of both Q1 and Q2 (angle to its image <= tol)."""
    n = state.p_norm
    if n <= tol:
        return True
    u = state.p / n
    return _is_eigvec(state.Q1, u, tol) and _is_eigvec(state.Q2, u, tol)


def detect_phase(state: MomentState, tol: float = LABEL_TOL) -> str:
    """Label the phase from the eigenvalue degeneracy of Q1, Q2 and from |p|.

    Q1 and Q2 that do not share an eigenframe, or a polar state whose
    spectra are fully degenerate, are ``unclassified``.
    """
    e1, e2 = state.eigvals()
    n1, n2 = _n_distinct(e1, tol), _n_distinct(e2, tol)
    polar = state.p_norm > tol
    if commutator_norm(state.Q1, state.Q2) > tol:
        return "unclassified"
    if n1 == 1 and n2 == 1:
        return "unclassified" if polar else "isotropic"
    kind = "biaxial" if max(n1, n2) == 3 else "uniaxial"
    return f"polar-{kind}" if polar else kind


@dataclass(frozen=True)
class SymmetryReport:
    commutator_norm: float
    shared_frame: np.ndarray | None
    p_aligned: bool
    eigvals_Q1: tuple[float, float, float]
    eigvals_Q2: tuple[float, float, float]
    phase_label: str


def analyze(state: MomentState, frame_tol: float = 1e-8, label_tol: float = LABEL_TOL) -> SymmetryReport:
    e1, e2 = state.eigvals()
    return SymmetryReport(
        commutator_norm=commutator_norm(state.Q1, state.Q2),
        shared_frame=shared_eigenframe(state.Q1, state.Q2, tol=frame_tol),
        p_aligned=p_alignment(state, label_tol),
        eigvals_Q1=tuple(float(x) for x in e1),
        eigvals_Q2=tuple(float(x) for x in e2),
        phase_label=detect_phase(state, label_tol),
    )


@dataclass(frozen=True)
class TheoremVerdict:
    applies: bool
    branch: str
    epsilon: float | None
    epsilon_swapped: float | None
    c1_ok: bool


def _epsilon(c2: float, c3: float, c4: float) -> float | None:
    return c4**2 / c3 - c2 if c3 != 0.0 else None


def theorem1_applies(coeffs: KernelCoeffs) -> TheoremVerdict:
    """Check the sufficient conditions for a shared Q1/Q2 eigenframe at every local minimum.

    Branches: ``not-negative-definite`` when ``c2 x^2 + 2 c4 x y + c3 y^2`` is
    not negative definite; otherwise ``epsilon-bound`` if
    ``c4^2/c3 - c2 <= 2`` or ``epsilon-bound-swapped`` if the same holds with
    c2 and c3 exchanged.  The conclusion also needs ``c1 >= -1``.
    """
    c1, c2, c3, c4 = coeffs.as_tuple()
    c1_ok = c1 >= -1.0
    eps = _epsilon(c2, c3, c4)
    eps_sw = _epsilon(c3, c2, c4)
    negdef = c2 < 0.0 and c2 * c3 - c4**2 > 0.0
    if not negdef:
        branch = "not-negative-definite"
    else:
        assert c3 < 0.0 and eps is not None and eps_sw is not None
        if eps <= 2.0:
            branch = "epsilon-bound"
        elif eps_sw <= 2.0:
            branch = "epsilon-bound-swapped"
        else:
            branch = "none"
    return TheoremVerdict(
        applies=c1_ok and branch != "none",
        branch=branch,
        epsilon=eps,
        epsilon_swapped=eps_sw,
        c1_ok=c1_ok,
    )


def c_min(c2_0: float, c3_0: float, c4_0: float) -> float:
    """Smallest intensity c at which ``c * (c2_0, c3_0, c4_0)`` leaves both epsilon bounds.

    Returns ``inf`` where the scaled quadratic form is never negative definite.
    """
    det = c2_0 * c3_0 - c4_0**2
    if det <= 0.0 or c2_0 >= 0.0:
        return math.inf
    return max(-2.0 * c2_0, -2.0 * c3_0) / det


def lemma_condition_check(state: MomentState, group_tag: str, tol: float = 1e-8) -> bool:
    """Whether the moments admit a space frame in which the phase carries the molecular symmetry.

    D_inf_h: Q1 has two equal eigenvalues.  C_inf_v: additionally p lies along
    the remaining axis.  D_2h: Q1 and Q2 share an eigenframe.  C_2v: shared
    eigenframe with p along one of its axes.
    """
    if group_tag not in GROUP_TAGS:
        raise ValueError(f"unknown point group {group_tag!r}; expected one of {GROUP_TAGS}")
    if group_tag in ("D_inf_h", "C_inf_v"):
        vals = np.linalg.eigvalsh(state.Q1)
        if group_tag == "D_inf_h" or state.p_norm <= tol:
            return _n_distinct(vals, tol) <= 2
        u = state.p / state.p_norm
        if not _is_eigvec(state.Q1, u, tol):
            return False
        rest = np.delete(vals, np.argmin(np.abs(vals - u @ state.Q1 @ u)))
        return abs(rest[1] - rest[0]) <= tol
    if shared_eigenframe(state.Q1, state.Q2, tol=tol) is None:
        return False
    return group_tag == "D_2h" or p_alignment(state, tol)
