"""Molecular point groups D_inf_h, C_inf_v, D_2h, C_2v and frame transformations.

The rotational axis of every molecule is the first body axis ``m1``.
Continuous groups are represented by sampling the rotation angle about it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .so3 import random_rotations

GROUP_TAGS = ("D_inf_h", "C_inf_v", "D_2h", "C_2v")

I3 = np.eye(3)
R1 = np.diag([1.0, -1.0, -1.0])
R2 = np.diag([-1.0, 1.0, -1.0])
R3 = np.diag([-1.0, -1.0, 1.0])
J3 = np.diag([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class GroupElement:
    matrix: np.ndarray
    parity: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if not np.allclose(m @ m.T, I3, atol=1e-12, rtol=0):
            raise ValueError("group element is not orthogonal")
        if abs(np.linalg.det(m) - self.parity) > 1e-12:
            raise ValueError("determinant does not match parity")
        object.__setattr__(self, "matrix", m)

    @property
    def proper(self) -> bool:
        return self.parity == 1


@dataclass(frozen=True)
class Frame:
    """An orthonormal frame (rows are the axes) that may be left-handed."""

    matrix: np.ndarray
    left_handed: bool


def _axial(theta: float, sign: float, improper: bool) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    if improper:
        return np.array([[sign, 0, 0], [0, sign * c, s], [0, sign * s, -c]])
    return np.array([[sign, 0, 0], [0, sign * c, -s], [0, sign * s, c]])


def _check_tag(tag: str) -> None:
    if tag not in GROUP_TAGS:
        raise ValueError(f"unknown point group {tag!r}; expected one of {GROUP_TAGS}")


def elements_at(tag: str, thetas) -> list[GroupElement]:
    """Group elements, with continuous groups evaluated at the given angles."""
    _check_tag(tag)
    if tag == "D_2h":
        proper = [I3, R1, R2, R3]
        return [GroupElement(m, 1) for m in proper] + [GroupElement(J3 @ m, -1) for m in proper]
    if tag == "C_2v":
        proper = [I3, R1]
        return [GroupElement(m, 1) for m in proper] + [GroupElement(J3 @ m, -1) for m in proper]
    signs = (1.0, -1.0) if tag == "D_inf_h" else (1.0,)
    out = []
    for improper in (False, True):
        for sign in signs:
            for th in thetas:
                out.append(GroupElement(_axial(float(th), sign, improper), -1 if improper else 1))
    return out


def elements(tag: str, n_theta: int = 8) -> list[GroupElement]:
    """Elements of the group; continuous groups are sampled at theta = 2 pi k / n_theta."""
    n_theta = max(int(n_theta), 1)
    return elements_at(tag, [2.0 * math.pi * k / n_theta for k in range(n_theta)])


def body_transform(P: np.ndarray, T: GroupElement) -> Frame:
    """Act with T on the molecule: body axes become ``m'_i = sum_k T_ki m_k``."""
    return Frame(T.matrix.T @ np.asarray(P), T.parity < 0)


def space_transform(T: GroupElement, P: np.ndarray) -> Frame:
    """Transform every body axis by T about the space-fixed frame: ``m_i -> T m_i``."""
    return Frame(np.asarray(P) @ T.matrix.T, T.parity < 0)


@dataclass(frozen=True)
class InvarianceReport:
    passed: bool
    max_violation: float


def check_kernel_invariance(
    kernel_eval: Callable[[np.ndarray], np.ndarray],
    group: str,
    n_samples: int = 64,
    tol: float = 1e-12,
    n_theta: int = 8,
    seed: int = 0,
) -> InvarianceReport:
    """Largest violation of ``G(Pbar) = G(T Pbar T')`` over sampled Pbar and element pairs.

    ``kernel_eval`` must accept a stack of matrices of shape (n, 3, 3) and return
    n scalars.  Pairs (T, T') are drawn with equal parity.  Continuous groups
    are checked on a uniform theta lattice plus random theta draws.
    """
    rng = np.random.default_rng(seed)
    if group in ("D_inf_h", "C_inf_v"):
        thetas = np.concatenate(
            [2.0 * np.pi * np.arange(n_theta) / n_theta, rng.uniform(0, 2 * np.pi, n_theta)]
        )
        elems = elements_at(group, thetas)
    else:
        elems = elements(group)
    Pbar = random_rotations(rng, n_samples)
    base = np.asarray(kernel_eval(Pbar), dtype=float)
    worst = 0.0
    for parity in (1, -1):
        mats = np.array([e.matrix for e in elems if e.parity == parity])
        # all products T Pbar T' at once: shape (nT, nT', n, 3, 3)
        prod = np.einsum("aij,njk,bkl->abnil", mats, Pbar, mats)
        vals = np.asarray(kernel_eval(prod.reshape(-1, 3, 3)), dtype=float)
        vals = vals.reshape(len(mats), len(mats), n_samples)
        worst = max(worst, float(np.max(np.abs(vals - base[None, None, :]))))
    return InvarianceReport(passed=worst <= tol, max_violation=worst)
