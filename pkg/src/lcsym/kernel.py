"""Quadratic pair kernels and their coefficients from molecular geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelCoeffs:
    """Coefficients of ``c1 p11 + c2 p11^2 + c3 p22^2 + c4 (p12^2 + p21^2)``.

    The intensity ``c`` is already absorbed.  Setting coefficients to zero
    gives the sub-kernels: Maier-Saupe (c2 only), C_inf_v (c1, c2) and
    D_2h (c2, c3, c4).
    """

    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4)

    def swapped(self) -> "KernelCoeffs":
        """Exchange the roles of c2 and c3."""
        return KernelCoeffs(self.c1, self.c3, self.c2, self.c4)

    def scaled(self, s: float) -> "KernelCoeffs":
        return KernelCoeffs(*(s * c for c in self.as_tuple()))

    @property
    def symmetry(self) -> str:
        """Smallest-constraint kernel family these coefficients belong to."""
        if self.c3 == 0.0 and self.c4 == 0.0:
            return "D_inf_h" if self.c1 == 0.0 else "C_inf_v"
        return "D_2h" if self.c1 == 0.0 else "C_2v"


@dataclass(frozen=True)
class Cuboid:
    W: float
    B: float
    L: float


@dataclass(frozen=True)
class Spherocuboid:
    W: float
    B: float
    L: float
    D: float


@dataclass(frozen=True)
class Spherotriangle:
    l: float
    theta: float
    D: float


MoleculeGeometry = Cuboid | Spherocuboid | Spherotriangle


def eval_kernel(coeffs: KernelCoeffs, Pbar) -> np.ndarray | float:
    """Kernel value at one relative orientation or a stack of shape (..., 3, 3)."""
    Pbar = np.asarray(Pbar, dtype=float)
    p11 = Pbar[..., 0, 0]
    p22 = Pbar[..., 1, 1]
    p12 = Pbar[..., 0, 1]
    p21 = Pbar[..., 1, 0]
    val = (
        coeffs.c1 * p11
        + coeffs.c2 * p11**2
        + coeffs.c3 * p22**2
        + coeffs.c4 * (p12**2 + p21**2)
    )
    return float(val) if np.ndim(val) == 0 else val


def _check_nonneg(c: float, **lengths: float) -> None:
    if not c > 0:
        raise ValueError(f"concentration c must be positive, got {c}")
    for name, v in lengths.items():
        if not v >= 0:
            raise ValueError(f"{name} must be non-negative, got {v}")


def _cuboid_brackets(W, B, L):
    common = -B * (W**2 + L**2) - W * (L**2 + B**2)
    b2 = common + 4 * W * B * L - (L**2 - B * W) * (B - W)
    b3 = common + 4 * W * B * L + (L**2 - B * W) * (B - W)
    b4 = common + L * (W**2 + B**2) + 2 * W * B * L
    return b2, b3, b4


def straley_cuboid_coeffs(geom: Cuboid, c: float = 1.0) -> KernelCoeffs:
    """Straley's coefficients for a hard cuboid with edges W, B, L."""
    _check_nonneg(c, W=geom.W, B=geom.B, L=geom.L)
    b2, b3, b4 = _cuboid_brackets(geom.W, geom.B, geom.L)
    return KernelCoeffs(0.0, c * b2, c * b3, c * b4)


def spherocuboid_coeffs(geom: Spherocuboid, c: float = 1.0) -> KernelCoeffs:
    """Projected excluded-volume coefficients of a spherocuboid (cuboid swept by a sphere of diameter D)."""
    W, B, L, D = geom.W, geom.B, geom.L, geom.D
    _check_nonneg(c, W=W, B=B, L=L, D=D)
    b2, b3, b4 = _cuboid_brackets(W, B, L)
    h = math.pi * D / 2
    # grouped as 15/16 * (c * [...]) so that D = 0 reproduces 15/16 of Straley bit for bit
    return KernelCoeffs(
        0.0,
        15 / 16 * (c * (b2 - h * (L - B) ** 2)),
        15 / 16 * (c * (b3 - h * (L - W) ** 2)),
        15 / 16 * (c * (b4 - h * (L - W) * (L - B))),
    )


def spherotriangle_coeffs(geom: Spherotriangle, c: float = 1.0, c1_value: float = 0.0) -> KernelCoeffs:
    """Coefficients of an isosceles spherotriangle with lateral length l/2 and top angle theta.

    ``c1_value`` is taken as given; its closed form involves an angular
    factor that is not available in closed form here.
    """
    l, th, D = geom.l, geom.theta, geom.D
    _check_nonneg(c, l=l, D=D)
    if not 0.0 < th < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {th}")
    if not c1_value >= 0:
        raise ValueError(f"c1_value must be non-negative, got {c1_value}")
    s, ch = math.sin(th), math.cos(th / 2)
    sh = math.sin(th / 2)
    c2 = -15 / 64 * c * l**3 * s * ch**2 - 15 * math.pi / 128 * c * l**2 * D * ch**4
    c3 = (
        -15 / 64 * c * l**3 * s * sh * (1 + sh)
        - 15 * math.pi / 128 * c * l**2 * D * sh**2 * (1 + sh) ** 2
    )
    c4 = (
        -15 / 128 * c * l**3 * s * (1 + sh)
        - 15 * math.pi / 128 * c * l**2 * D * ch**2 * sh * (1 + sh)
    )
    return KernelCoeffs(float(c1_value), c2, c3, c4)


def geometry_coeffs(geom: MoleculeGeometry, c: float = 1.0, c1_value: float = 0.0) -> KernelCoeffs:
    if isinstance(geom, Cuboid):
        return straley_cuboid_coeffs(geom, c)
    if isinstance(geom, Spherocuboid):
        return spherocuboid_coeffs(geom, c)
    if isinstance(geom, Spherotriangle):
        return spherotriangle_coeffs(geom, c, c1_value)
    raise TypeError(f"unsupported geometry {geom!r}")


def discriminant(coeffs: KernelCoeffs) -> float:
    """``c4^2 - c2 c3``; non-negative means the (c2, c3, c4) quadratic form is indefinite or degenerate."""
    return coeffs.c4**2 - coeffs.c2 * coeffs.c3
