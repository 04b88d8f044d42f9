"""Floating-point proximal point iterations on linear monotone operators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

__all__ = [
    "LinearMonotone",
    "RotationOperator",
    "OperatorSpec",
    "Trajectory",
    "resolvent",
    "ppa_run",
    "performance_ratio",
    "normalize",
    "rotation_for",
]

MONOTONE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LinearMonotone:
    """``A(w) = S w`` with ``S + S^T`` positive semidefinite."""

    s: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.s, dtype=float))
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {s.shape}")
        lo = np.linalg.eigvalsh((s + s.T) / 2).min()
        if lo < -MONOTONE_TOL:
            raise ValueError(f"operator is not monotone: symmetric part has eigenvalue {lo:.3e}")
        object.__setattr__(self, "s", s)

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.s

    def __call__(self, w) -> np.ndarray:
        return self.s @ np.asarray(w, dtype=float)


@dataclass(frozen=True)
class RotationOperator:
    """Planar skew operator ``A(w) = tan(theta) [[0, 1], [-1, 0]] w``.

    Its resolvent ``J_A`` is ``cos(theta)`` times the rotation by ``theta``.
    """

    theta: float

    def __post_init__(self):
        if not 0 < self.theta < math.pi / 2:
            raise ValueError(f"theta must lie in (0, pi/2), got {self.theta}")

    @property
    def dim(self) -> int:
        return 2

    @property
    def matrix(self) -> np.ndarray:
        return math.tan(self.theta) * np.array([[0.0, 1.0], [-1.0, 0.0]])

    def __call__(self, w) -> np.ndarray:
        return self.matrix @ np.asarray(w, dtype=float)


OperatorSpec = Union[LinearMonotone, RotationOperator]


def rotation_for(n_iters: int) -> RotationOperator:
    """Rotation whose angle has ``cos^2 = N/(N+1)``, the worst case for ``N`` steps."""
    return RotationOperator(math.acos(math.sqrt(n_iters / (n_iters + 1))))


def resolvent(op: OperatorSpec, lam: float, w) -> np.ndarray:
    """Solve ``w' + lam A(w') = w`` for ``w'``."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    w = np.asarray(w, dtype=float)
    if w.shape != (op.dim,):
        raise ValueError(f"point has shape {w.shape}, operator acts on dimension {op.dim}")
    try:
        return np.linalg.solve(np.eye(op.dim) + lam * op.matrix, w)
    except np.linalg.LinAlgError as exc:
        raise ValueError("I + lambda*A is singular; operator is not monotone") from exc


@dataclass(frozen=True)
class Trajectory:
    lam: float
    points: list[np.ndarray]
    residual_norms: list[float] = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.residual_norms)


def ppa_run(op: OperatorSpec, w0, lam: float, n: int) -> Trajectory:
    """Run ``n`` proximal point steps from ``w0``; the trajectory holds ``n + 1`` points."""
    if n < 1:
        raise ValueError(f"need at least one step, got {n}")
    points = [np.asarray(w0, dtype=float).reshape(-1)]
    residuals = []
    for _ in range(n):
        nxt = resolvent(op, lam, points[-1])
        residuals.append(float(np.linalg.norm(points[-1] - nxt)))
        points.append(nxt)
    return Trajectory(lam, points, residuals)


def _initial_distance(t: Trajectory, w_star) -> float:
    dist = float(np.linalg.norm(t.points[0] - np.asarray(w_star, dtype=float)))
    if dist == 0:
        raise ValueError("initial point coincides with w_star")
    return dist


def performance_ratio(t: Trajectory, w_star) -> float:
    """``||w^N - w^{N+1}||^2 / ||w^0 - w*||^2`` where ``w^{N+1}`` is the last point."""
    if len(t.points) < 2:
        raise ValueError("trajectory needs at least two points")
    dist = _initial_distance(t, w_star)
    return float(np.sum((t.points[-2] - t.points[-1]) ** 2)) / dist**2


def normalize(t: Trajectory, w_star: Sequence[float]) -> Trajectory:
    """Shift ``w*`` to the origin and rescale so that ``lambda = 1`` and ``||w^0|| = 1``.

    Dividing by ``lambda`` turns the operator into ``A(lambda .)`` run with unit
    step; dividing further by ``gamma = ||w^0 - w*|| / lambda`` conjugates it to
    unit initial distance.  The composite map is ``w -> (w - w*) / ||w^0 - w*||``.
    """
    scale = _initial_distance(t, w_star)
    shift = np.asarray(w_star, dtype=float)
    points = [(p - shift) / scale for p in t.points]
    return Trajectory(1.0, points, [r / scale for r in t.residual_norms])
