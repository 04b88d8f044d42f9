"""Closed-form dual multipliers and an exact proof that the dual slack is PSD.

The dual slack matrix is

    M = eta*E11 - C - sum lambda_ij A_ij - sum mu_i B_i,

and the multipliers below make it pentadiagonal.  For ``N >= 4`` the proof
walks the explicit last-index Schur recursion ``M = M^[N+2] -> M^[N+1] -> ...``
and checks every intermediate window against its closed form, so a mismatch
pinpoints exactly which step of the argument failed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .pep_builder import PepInstance, build_instance
from .rational_linalg import PSD, SymMatrix, psd_certify, schur_reduce

__all__ = [
    "DualCertificate",
    "CertificateError",
    "PsdPath",
    "Verification",
    "construct_certificate",
    "assemble_m",
    "closed_form_entries",
    "recursion_window",
    "recursion_pivot",
    "terminal_m4",
    "terminal_m3",
    "verify_certificate",
    "certified_upper_bound",
    "zeta",
]


def zeta(n_iters: int) -> Fraction:
    """``N^N / (N+1)^(N+1)``, the tight worst-case residual ratio after N steps."""
    return Fraction(n_iters**n_iters, (n_iters + 1) ** (n_iters + 1))


def _r(n: int, power: int) -> Fraction:
    return Fraction(n, n + 1) ** power


@dataclass(frozen=True)
class DualCertificate:
    n_iters: int
    lam: dict[tuple[int, int], Fraction]
    mu: tuple[Fraction, ...]
    eta: Fraction

    def lam_at(self, i: int, j: int) -> Fraction:
        return self.lam.get((i, j), Fraction(0))


def construct_certificate(n_iters: int) -> DualCertificate:
    """Multipliers ``lambda_{i,i+1}``, ``mu_i`` and ``eta`` for ``N`` steps.

    Only the consecutive-pair multipliers are nonzero; ``mu[i - 1]`` is ``mu_i``.
    """
    if n_iters < 1:
        raise ValueError(f"need at least one iteration, got {n_iters}")
    n, q = n_iters, n_iters + 1
    lam = {(i, i + 1): _r(n, n - i) * Fraction(i, q) for i in range(1, n + 1)}
    mu = [_r(n, n - i) * Fraction(n - i, q * q) for i in range(1, n + 1)]
    mu.append(Fraction(1, q))
    eta = _r(n, n) * Fraction(1, q)
    return DualCertificate(n, lam, tuple(mu), eta)


def assemble_m(cert: DualCertificate, inst: PepInstance) -> SymMatrix:
    """Form ``eta E11 - C - sum lambda A - sum mu B`` exactly."""
    if cert.n_iters != inst.n_iters:
        raise ValueError(f"certificate is for N={cert.n_iters}, instance for N={inst.n_iters}")
    m = cert.eta * inst.e11 - inst.c_mat
    for key, lam in cert.lam.items():
        if lam:
            m = m - lam * inst.a_mats[key]
    for mu, b in zip(cert.mu, inst.b_mats):
        if mu:
            m = m - mu * b
    return m


def closed_form_entries(n_iters: int) -> SymMatrix:
    """Build the pentadiagonal ``M`` directly from its entrywise formulas."""
    n = n_iters
    if n < 2:
        raise ValueError("closed form needs N >= 2; use assemble_m")
    q = n + 1
    e: dict[tuple[int, int], Fraction] = {}

    def put(i: int, j: int, v: Fraction) -> None:  # 1-based
        e[(i - 1, j - 1)] = v

    put(1, 1, _r(n, n) / q)
    for i in range(2, n + 1):
        put(i, i, _r(n, n + 1 - i) * Fraction((i - 1) * (6 * n + 2), q * q))
    put(n + 1, n + 1, Fraction(5 * n * n - 1, q * q))
    put(n + 2, n + 2, Fraction(1))
    put(1, 2, -_r(n, n) * Fraction(2, q))
    for i in range(2, n + 1):
        put(i, i + 1, -_r(n, n + 1 - i) * Fraction(4 * i - 2, q))
    put(n + 1, n + 2, Fraction(-2 * n, q))
    for i in range(1, n + 1):
        put(i, i + 2, _r(n, n - i) * Fraction(i, q))
    return SymMatrix(n + 2, e)


def recursion_window(n_iters: int, k: int) -> dict[tuple[int, int], Fraction]:
    """Predicted nonzeros of columns ``k-2 .. k`` of ``M^[k]``, for ``5 <= k <= N+1``.

    Keys are 1-based ``(row, col)`` with ``row <= col``; every other entry of
    those columns above the diagonal is zero.
    """
    n, q = n_iters, n_iters + 1
    if not 5 <= k <= n + 1:
        raise ValueError(f"window defined for 5 <= k <= N+1, got k={k}, N={n}")
    return {
        (k - 4, k - 2): _r(n, n + 4 - k) * Fraction(k - 4, q),
        (k - 3, k - 2): -_r(n, n + 4 - k) * Fraction(4 * k - 14, q),
        (k - 3, k - 1): _r(n, n + 3 - k) * Fraction(k - 3, q),
        (k - 2, k - 2): _r(n, n + 3 - k) * Fraction((k - 3) * (6 * n + 2), q * q),
        (k - 2, k - 1): -_r(n, n + 3 - k) * Fraction(4 * k - 10, q),
        (k - 2, k): _r(n, n + 2 - k) * Fraction(k - 2, q),
        (k - 1, k - 1): _r(n, n + 2 - k) * Fraction((5 * k - 11) * n + (k - 3), q * q),
        (k - 1, k): -_r(n, n + 2 - k) * Fraction(2 * k - 4, q),
        (k, k): recursion_pivot(n, k),
    }


def recursion_pivot(n_iters: int, k: int) -> Fraction:
    """Predicted last diagonal entry of ``M^[k]``."""
    return _r(n_iters, n_iters + 1 - k) * Fraction(k - 2, n_iters + 1)


def terminal_m4(n_iters: int) -> SymMatrix:
    n, q = n_iters, n_iters + 1

    def p(e: int) -> Fraction:
        return _r(n, e)

    return SymMatrix.from_rows([
        [p(n) / q, -p(n) * 2 / q, p(n - 1) / q, 0],
        [-p(n) * 2 / q, p(n - 1) * Fraction(6 * n + 2, q * q), -p(n - 1) * 6 / q, p(n - 2) * 2 / q],
        [p(n - 1) / q, -p(n - 1) * 6 / q, p(n - 2) * Fraction(9 * n + 1, q * q), -p(n - 2) * 4 / q],
        [0, p(n - 2) * 2 / q, -p(n - 2) * 4 / q, p(n - 3) * 2 / q],
    ])


def terminal_m3(n_iters: int) -> SymMatrix:
    n, q = n_iters, n_iters + 1

    def p(e: int) -> Fraction:
        return _r(n, e)

    return SymMatrix.from_rows([
        [p(n) / q, -p(n) * 2 / q, p(n - 1) / q],
        [-p(n) * 2 / q, p(n - 1) * Fraction(4 * n, q * q), -p(n - 1) * 2 / q],
        [p(n - 1) / q, -p(n - 1) * 2 / q, p(n - 2) / q],
    ])


class PsdPath(str, Enum):
    APPENDIX_RECURSION = "appendix-recursion"
    GENERAL_LDLT = "general-ldlt"


@dataclass(frozen=True)
class Verification:
    eta: Fraction
    psd_path: PsdPath


class CertificateError(AssertionError):
    """The dual slack matrix failed a check; ``k`` is the order being reduced."""

    def __init__(self, n_iters: int, k: int | None, entry: tuple[int, int] | None, detail: str):
        self.n_iters = n_iters
        self.k = k
        self.entry = entry
        where = f" at k={k}" if k is not None else ""
        if entry is not None:
            where += f", entry {entry}"
        super().__init__(f"N={n_iters}{where}: {detail}")


def _check_window(n: int, k: int, mk: SymMatrix) -> None:
    expected = recursion_window(n, k)
    for col in range(k - 2, k + 1):
        for row in range(1, col + 1):
            want = expected.get((row, col), Fraction(0))
            got = mk[row - 1, col - 1]
            if got != want:
                raise CertificateError(n, k, (row, col), f"window entry is {got}, expected {want}")


def _pivot(n: int, k: int, mk: SymMatrix) -> None:
    c = mk[k - 1, k - 1]
    if c <= 0:
        raise CertificateError(n, k, (k, k), f"pivot {c} not positive")


def _appendix_recursion(n: int, m: SymMatrix) -> None:
    _pivot(n, n + 2, m)
    mk = schur_reduce(m, n + 2)
    for k in range(n + 1, 4, -1):
        _check_window(n, k, mk)
        want = recursion_pivot(n, k)
        if mk[k - 1, k - 1] != want:
            raise CertificateError(n, k, (k, k), f"pivot {mk[k - 1, k - 1]} differs from {want}")
        _pivot(n, k, mk)
        mk = schur_reduce(mk, k)
    for k, expected in ((4, terminal_m4(n)), (3, terminal_m3(n))):
        if mk != expected:
            bad = next((i + 1, j + 1) for i in range(k) for j in range(i, k) if mk[i, j] != expected[i, j])
            raise CertificateError(n, k, bad, f"M^[{k}] differs from its closed form")
        _pivot(n, k, mk)
        mk = schur_reduce(mk, k)
    if not mk.is_zero():
        raise CertificateError(n, 2, None, f"M^[2] is not zero: {mk!r}")


_cache: dict[int, Verification] = {}
_cache_lock = threading.Lock()


def verify_certificate(n_iters: int) -> Verification:
    """Prove ``M >= 0`` exactly for the closed-form multipliers and return eta.

    ``N >= 4`` follows the explicit Schur recursion down to the 2x2 zero
    matrix; smaller ``N`` use the general pivoted factorization.  Results are
    cached per ``N``.  Raises :class:`CertificateError` on any failed check.
    """
    if n_iters < 1:
        raise ValueError(f"need at least one iteration, got {n_iters}")
    with _cache_lock:
        hit = _cache.get(n_iters)
    if hit is not None:
        return hit
    cert = construct_certificate(n_iters)
    if any(v < 0 for v in (*cert.lam.values(), *cert.mu)):
        raise CertificateError(n_iters, None, None, "negative multiplier")
    m = assemble_m(cert, build_instance(n_iters))
    if n_iters >= 4:
        _appendix_recursion(n_iters, m)
        path = PsdPath.APPENDIX_RECURSION
    else:
        result = psd_certify(m)
        if not isinstance(result, PSD):
            raise CertificateError(n_iters, None, None, f"M is not PSD, witness {result.witness}")
        path = PsdPath.GENERAL_LDLT
    out = Verification(cert.eta, path)
    with _cache_lock:
        _cache.setdefault(n_iters, out)
    return out


def certified_upper_bound(n_iters: int) -> Fraction:
    """Upper bound on the worst-case ratio, returned only once the dual is verified."""
    eta = verify_certificate(n_iters).eta
    if eta != zeta(n_iters):
        raise CertificateError(n_iters, None, None, f"eta {eta} differs from N^N/(N+1)^(N+1)")
    return eta
