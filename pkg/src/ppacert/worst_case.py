"""The planar rotation instance that attains the worst case.

With ``beta = cos(theta)`` the iterates are ``w^k = beta^k Theta^k w^0`` for
the rotation ``Theta`` by ``theta``.  Coordinates are irrational once
``beta^2 = N/(N+1)``, but every inner product is rational:

    <w^i, w^j> = beta^(2i) * c_(j-i),   c_k = beta^k cos(k theta),

and ``c_k`` obeys ``c_0 = 1, c_1 = beta^2, c_(k+1) = 2 beta^2 c_k - beta^2 c_(k-1)``.
So the instance is held as its Gram matrix and certified exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .dual_certificate import (
    CertificateError,
    DualCertificate,
    construct_certificate,
    verify_certificate,
    zeta,
)
from .pep_builder import build_instance, constraint_values
from .rational_linalg import PSD, SymMatrix, psd_certify

__all__ = [
    "WorstCaseInstance",
    "OptimalRate",
    "CertificationError",
    "EqualityViolation",
    "cosine_moments",
    "build_gram",
    "verify_equalities",
    "achieved_ratio",
    "certify_optimal_rate",
    "emit_points",
    "rotation_pairs",
]


@dataclass(frozen=True)
class WorstCaseInstance:
    n_iters: int
    beta_sq: Fraction
    gram: SymMatrix
    achieved: Fraction


def cosine_moments(beta_sq: Fraction, count: int) -> list[Fraction]:
    """``c_0 .. c_(count-1)`` with ``c_k = beta^k cos(k theta)`` and ``cos(theta) = beta``."""
    c = [Fraction(1), Fraction(beta_sq)]
    while len(c) < count:
        c.append(2 * beta_sq * c[-1] - beta_sq * c[-2])
    return c[:count]


def build_gram(n_iters: int) -> WorstCaseInstance:
    """Exact Gram matrix of ``w^0 .. w^{N+1}`` for ``beta^2 = N/(N+1)``."""
    if n_iters < 1:
        raise ValueError(f"need at least one iteration, got {n_iters}")
    b2 = Fraction(n_iters, n_iters + 1)
    n = n_iters + 2
    c = cosine_moments(b2, n)
    powers = [b2**i for i in range(n)]
    entries = {(i, j): powers[i] * c[j - i] for i in range(n) for j in range(i, n)}
    achieved = b2**n_iters * (1 - b2)
    return WorstCaseInstance(n_iters, b2, SymMatrix(n, entries), achieved)


class EqualityViolation(AssertionError):
    pass


def verify_equalities(inst: WorstCaseInstance) -> None:
    """Check that every interpolation constraint is active on the Gram matrix.

    Raises :class:`EqualityViolation` naming the first nonzero constraint.
    """
    values = constraint_values(build_instance(inst.n_iters), inst.gram)
    for (i, j), v in values.a_vals.items():
        if v != 0:
            raise EqualityViolation(f"<A[{i},{j}], X> = {v} != 0")
    for i, v in enumerate(values.b_vals, start=1):
        if v != 0:
            raise EqualityViolation(f"<B[{i}], X> = {v} != 0")


def achieved_ratio(n_iters: int) -> Fraction:
    """``beta^(2N) (1 - beta^2)`` at ``beta^2 = N/(N+1)``."""
    if n_iters < 1:
        raise ValueError(f"need at least one iteration, got {n_iters}")
    b2 = Fraction(n_iters, n_iters + 1)
    return b2**n_iters * (1 - b2)


@dataclass(frozen=True)
class OptimalRate:
    zeta: Fraction
    primal: WorstCaseInstance
    dual: DualCertificate


class CertificationError(AssertionError):
    def __init__(self, stage: str, detail: str):
        self.stage = stage
        super().__init__(f"{stage}: {detail}")


def certify_optimal_rate(n_iters: int) -> OptimalRate:
    """Certify ``zeta(N) = N^N/(N+1)^(N+1)`` by a primal/dual pair with zero gap.

    ``stage`` on a raised :class:`CertificationError` is one of ``"primal"``,
    ``"dual"`` or ``"gap"``.
    """
    primal = build_gram(n_iters)
    inst = build_instance(n_iters)
    result = psd_certify(primal.gram)
    if not isinstance(result, PSD):
        raise CertificationError("primal", "Gram matrix is not PSD")
    values = constraint_values(inst, primal.gram)
    if values.e_val != 1:
        raise CertificationError("primal", f"<E11, X> = {values.e_val}")
    try:
        verify_equalities(primal)
    except EqualityViolation as exc:
        raise CertificationError("primal", str(exc)) from exc
    try:
        eta = verify_certificate(n_iters).eta
    except CertificateError as exc:
        raise CertificationError("dual", str(exc)) from exc
    if values.objective != eta or primal.achieved != eta:
        raise CertificationError("gap", f"primal {values.objective} vs dual {eta}")
    if eta != zeta(n_iters):
        raise CertificationError("gap", f"eta {eta} differs from N^N/(N+1)^(N+1)")
    return OptimalRate(eta, primal, construct_certificate(n_iters))


def emit_points(n_iters: int, scale: float = 1.0) -> list[tuple[float, float]]:
    """Floating coordinates ``scale * beta^k Theta^k (1, 0)`` for ``k = 0 .. N+1``."""
    if n_iters < 1:
        raise ValueError(f"need at least one iteration, got {n_iters}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    beta = math.sqrt(n_iters / (n_iters + 1))
    theta = math.acos(beta)
    k = np.arange(n_iters + 2)
    radius = scale * beta**k
    return [(float(x), float(y)) for x, y in zip(radius * np.cos(k * theta), radius * np.sin(k * theta))]


Scalar = Union[int, float, Fraction]


def rotation_pairs(n_iters: int, cos_theta: Scalar, sin_theta: Scalar) -> list[tuple[Sequence[Scalar], Sequence[Scalar]]]:
    """Pairs ``(w^k, u^k = w^{k-1} - w^k)`` for ``k = 1 .. N+1`` from ``w^0 = (1, 0)``.

    The arithmetic follows the inputs, so a rational angle (``cos^2 + sin^2 = 1``
    with both rational) gives exact points.
    """
    c, s = cos_theta, sin_theta
    w = [type(c)(1), type(c)(0)]
    pairs = []
    for _ in range(n_iters + 1):
        nxt = [c * (c * w[0] - s * w[1]), c * (s * w[0] + c * w[1])]
        pairs.append((nxt, [w[0] - nxt[0], w[1] - nxt[1]]))
        w = nxt
    return pairs
