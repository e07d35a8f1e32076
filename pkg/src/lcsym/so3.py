"""Euler-angle chart of SO(3), frame algebra and tensor-product quadrature.

Orientations are stored as explicit 3x3 arrays whose row ``i`` holds the
space-frame components of the body axis ``m_i``.  Quadrature integrates
against the uniform probability measure
``dnu = sin(alpha) dalpha dbeta dgamma / (8 pi^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class ConfigurationError(ValueError):
    """Invalid grid or solver configuration."""


@dataclass(frozen=True)
class EulerAngles:
    """Euler angles, normalized to alpha in [0, pi] and beta, gamma in [0, 2 pi)."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        a = math.fmod(self.alpha, TWO_PI)
        if a < 0.0:
            a += TWO_PI
        b, g = self.beta, self.gamma
        if a > math.pi:
            # (alpha, beta, gamma) and (2pi - alpha, beta + pi, gamma + pi) give the same matrix
            a = TWO_PI - a
            b += math.pi
            g += math.pi
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", _wrap(b))
        object.__setattr__(self, "gamma", _wrap(g))


def _wrap(x: float) -> float:
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    if y >= TWO_PI:
        y = 0.0
    return y


def euler_matrix(alpha, beta, gamma) -> np.ndarray:
    """Vectorized Euler-angle matrix; broadcasting inputs give shape (..., 3, 3)."""
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float), np.asarray(gamma, dtype=float)
    )
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    out = np.empty(alpha.shape + (3, 3))
    out[..., 0, 0] = ca
    out[..., 0, 1] = -sa * cg
    out[..., 0, 2] = sa * sg
    out[..., 1, 0] = sa * cb
    out[..., 1, 1] = ca * cb * cg - sb * sg
    out[..., 1, 2] = -ca * cb * sg - sb * cg
    out[..., 2, 0] = sa * sb
    out[..., 2, 1] = ca * sb * cg + cb * sg
    out[..., 2, 2] = -ca * sb * sg + cb * cg
    return out


def euler_to_rotation(angles: EulerAngles) -> np.ndarray:
    """Rotation matrix of the given Euler angles (row i is the body axis m_i)."""
    return euler_matrix(angles.alpha, angles.beta, angles.gamma)


def relative_orientation(P: np.ndarray, P2: np.ndarray) -> np.ndarray:
    """Relative orientation with entries ``p_ij = m_i . m'_j``."""
    return np.asarray(P) @ np.asarray(P2).T


def is_rotation(P: np.ndarray, tol: float = 1e-12) -> bool:
    P = np.asarray(P, dtype=float)
    if P.shape != (3, 3):
        return False
    return bool(
        np.max(np.abs(P @ P.T - np.eye(3))) <= tol and abs(np.linalg.det(P) - 1.0) <= tol
    )


def random_rotations(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Haar-distributed rotations (uniform quaternions)."""
    shape = () if n is None else (n,)
    q = rng.standard_normal(shape + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = np.moveaxis(q, -1, 0)
    R = np.empty(shape + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y - z * w)
    R[..., 0, 2] = 2 * (x * z + y * w)
    R[..., 1, 0] = 2 * (x * y + z * w)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z - x * w)
    R[..., 2, 0] = 2 * (x * z - y * w)
    R[..., 2, 1] = 2 * (y * z + x * w)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre in cos(alpha) times uniform nodes in beta and gamma.

    Attributes
    ----------
    rotations : (N, 3, 3) array of node orientations.
    weights : (N,) probability masses, summing to one.
    sizes : (n_alpha, n_beta, n_gamma).
    """

    rotations: np.ndarray
    weights: np.ndarray
    sizes: tuple[int, int, int]
    _features: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def m1(self) -> np.ndarray:
        return self.rotations[:, 0, :]

    @property
    def m2(self) -> np.ndarray:
        return self.rotations[:, 1, :]

    @property
    def features(self) -> np.ndarray:
        """Per-node design matrix ``[m1 | vec(m1 m1) | vec(m2 m2)]`` of shape (N, 21).

        Both the mean-field potential and all moments are linear in these
        columns, so one matrix product evaluates either.
        """
        if self._features is None:
            m1, m2 = self.m1, self.m2
            feats = np.concatenate(
                [
                    m1,
                    (m1[:, :, None] * m1[:, None, :]).reshape(-1, 9),
                    (m2[:, :, None] * m2[:, None, :]).reshape(-1, 9),
                ],
                axis=1,
            )
            feats.setflags(write=False)
            object.__setattr__(self, "_features", feats)
        return self._features


def build_grid(n_alpha: int = 32, n_beta: int = 32, n_gamma: int = 32) -> QuadratureGrid:
    """Tensor-product quadrature for the uniform measure on SO(3).

    The sin(alpha) factor is absorbed by using Gauss-Legendre nodes in
    ``t = cos(alpha)``; beta and gamma use the periodic trapezoid rule.
    Monomials of degree < min(n_beta, n_gamma) in the matrix entries are
    integrated exactly (up to roundoff) once ``n_alpha`` is large enough.
    """
    sizes = (int(n_alpha), int(n_beta), int(n_gamma))
    if min(sizes) < 2:
        raise ConfigurationError(f"grid sizes must all be >= 2, got {sizes}")
    t, wt = np.polynomial.legendre.leggauss(sizes[0])
    alpha = np.arccos(t)
    beta = TWO_PI * np.arange(sizes[1]) / sizes[1]
    gamma = TWO_PI * np.arange(sizes[2]) / sizes[2]
    A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
    rotations = euler_matrix(A, B, G).reshape(-1, 3, 3)
    w = np.broadcast_to((0.5 * wt)[:, None, None], A.shape) / (sizes[1] * sizes[2])
    weights = np.ascontiguousarray(w.reshape(-1))
    rotations.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(rotations=rotations, weights=weights, sizes=sizes)


def integrate(grid: QuadratureGrid, values) -> float | np.ndarray:
    """Quadrature of per-node values; extra trailing axes are integrated componentwise."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 0 or values.shape[0] != len(grid):
        raise ValueError(
            f"expected {len(grid)} per-node values, got shape {values.shape}"
        )
    if values.ndim == 1:
        return float(grid.weights @ values)
    return np.tensordot(grid.weights, values, axes=(0, 0))
