from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MomentState:
    """Angular moments ``p = <m1>``, ``Q1 = <m1 m1>``, ``Q2 = <m2 m2>``."""

    p: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray

    def __post_init__(self):
        for name, shape in (("p", (3,)), ("Q1", (3, 3)), ("Q2", (3, 3))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def isotropic(cls) -> "MomentState":
        return cls(np.zeros(3), np.eye(3) / 3, np.eye(3) / 3)

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "MomentState":
        x = np.asarray(x, dtype=float)
        return cls(x[:3], x[3:12].reshape(3, 3), x[12:21].reshape(3, 3))

    def to_vector(self) -> np.ndarray:
        """Flatten as ``[p | vec(Q1) | vec(Q2)]`` (the solver's feature layout)."""
        return np.concatenate([self.p, self.Q1.ravel(), self.Q2.ravel()])

    def rotated(self, R: np.ndarray) -> "MomentState":
        """Moments after rotating every orientation by R about the space frame."""
        R = np.asarray(R, dtype=float)
        return MomentState(R @ self.p, R @ self.Q1 @ R.T, R @ self.Q2 @ R.T)

    @property
    def p_norm(self) -> float:
        return float(np.linalg.norm(self.p))

    def eigvals(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues of Q1 and Q2."""
        return np.linalg.eigvalsh(self.Q1), np.linalg.eigvalsh(self.Q2)

    def violations(self) -> dict[str, float]:
        """Size of each invariant violation (all zero for moments of a density)."""
        Q3 = np.eye(3) - self.Q1 - self.Q2
        return {
            "asymmetry": float(max(np.abs(self.Q1 - self.Q1.T).max(), np.abs(self.Q2 - self.Q2.T).max())),
            "trace": float(max(abs(np.trace(self.Q1) - 1), abs(np.trace(self.Q2) - 1))),
            "negativity": float(
                max(0.0, -np.linalg.eigvalsh(self.Q1)[0], -np.linalg.eigvalsh(self.Q2)[0], -np.linalg.eigvalsh(Q3)[0])
            ),
            "p_norm_excess": max(0.0, self.p_norm - 1.0),
        }

    def is_admissible(self, sym_tol: float = 1e-12, tol: float = 1e-10) -> bool:
        v = self.violations()
        return (
            v["asymmetry"] <= sym_tol
            and v["trace"] <= tol
            and v["negativity"] <= tol
            and v["p_norm_excess"] <= tol
        )
