"""Exact rational linear algebra on symmetric matrices.

Everything here works on :class:`fractions.Fraction`, which keeps values in
lowest terms after every operation.  :class:`SymMatrix` stores only the
nonzero entries of its upper triangle, so the sparse constraint matrices of a
performance estimation problem and the dense Gram matrices share one type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

Rational = Fraction
Number = Union[int, Fraction]

__all__ = [
    "Rational",
    "SymMatrix",
    "PSD",
    "NotPSD",
    "PivotError",
    "trace_inner",
    "quad_form",
    "psd_certify",
    "schur_reduce",
    "format_decimal",
]


def _key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


class SymMatrix:
    """Immutable symmetric matrix with exact rational entries.

    Indices are 0-based. Only the upper triangle (``i <= j``) is stored, and
    only entries that are nonzero, so ``m[i, j]`` and ``m[j, i]`` always agree.
    """

    __slots__ = ("_order", "_entries", "_hash")

    def __init__(self, order: int, entries: Mapping[tuple[int, int], Number] = ()):
        if order < 1:
            raise ValueError(f"order must be positive, got {order}")
        store: dict[tuple[int, int], Fraction] = {}
        for (i, j), value in dict(entries).items():
            if not (0 <= i < order and 0 <= j < order):
                raise IndexError(f"entry ({i}, {j}) outside order {order}")
            value = Fraction(value)
            k = _key(i, j)
            if k in store and store[k] != value:
                raise ValueError(f"conflicting values for symmetric entry {k}")
            if value != 0:
                store[k] = value
        self._order = order
        self._entries = store
        self._hash = None

    @classmethod
    def _trusted(cls, order: int, store: dict[tuple[int, int], Fraction]) -> "SymMatrix":
        # store must already hold upper-triangle keys with nonzero Fractions
        m = cls.__new__(cls)
        m._order = order
        m._entries = store
        m._hash = None
        return m

    @classmethod
    def zeros(cls, order: int) -> "SymMatrix":
        return cls(order)

    @classmethod
    def identity(cls, order: int) -> "SymMatrix":
        return cls(order, {(i, i): 1 for i in range(order)})

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Number]]) -> "SymMatrix":
        """Build from a full square array, which must be exactly symmetric."""
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("rows do not form a square array")
        entries = {}
        for i in range(n):
            for j in range(i, n):
                a, b = Fraction(rows[i][j]), Fraction(rows[j][i])
                if a != b:
                    raise ValueError(f"array is not symmetric at ({i}, {j})")
                entries[(i, j)] = a
        return cls(n, entries)

    @classmethod
    def outer_sum(cls, order: int, u: Mapping[int, Number], v: Mapping[int, Number]) -> "SymMatrix":
        """Return ``u v^T + v u^T`` for sparse vectors given as ``{index: value}``."""
        acc: dict[tuple[int, int], Fraction] = {}
        for i, a in u.items():
            for j, b in v.items():
                k = _key(i, j)
                term = Fraction(a) * Fraction(b)
                acc[k] = acc.get(k, Fraction(0)) + (2 * term if i == j else term)
        return cls._trusted(order, {k: x for k, x in acc.items() if x != 0})

    @property
    def order(self) -> int:
        return self._order

    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        if not (0 <= i < self._order and 0 <= j < self._order):
            raise IndexError(f"entry ({i}, {j}) outside order {self._order}")
        return self._entries.get(_key(i, j), Fraction(0))

    def items(self) -> Iterator[tuple[tuple[int, int], Fraction]]:
        """Nonzero upper-triangle entries as ``((i, j), value)`` with ``i <= j``."""
        return iter(self._entries.items())

    @property
    def nnz(self) -> int:
        return len(self._entries)

    def to_rows(self) -> list[list[Fraction]]:
        rows = [[Fraction(0)] * self._order for _ in range(self._order)]
        for (i, j), v in self._entries.items():
            rows[i][j] = v
            rows[j][i] = v
        return rows

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self._order, self._order))
        for (i, j), v in self._entries.items():
            out[i, j] = out[j, i] = float(v)
        return out

    def leading(self, k: int) -> "SymMatrix":
        """Leading principal submatrix of order ``k``."""
        if not 1 <= k <= self._order:
            raise ValueError(f"cannot take leading block {k} of order {self._order}")
        return SymMatrix._trusted(k, {key: v for key, v in self._entries.items() if key[1] < k})

    def is_zero(self) -> bool:
        return not self._entries

    def bandwidth(self) -> int:
        """Largest ``j - i`` over nonzero entries (0 for diagonal or zero matrices)."""
        return max((j - i for i, j in self._entries), default=0)

    def common_denominator(self) -> int:
        return math.lcm(1, *(v.denominator for v in self._entries.values()))

    def _combine(self, other: "SymMatrix", sign: int) -> "SymMatrix":
        _check_order(self, other)
        store = dict(self._entries)
        for k, v in other._entries.items():
            s = store.get(k, Fraction(0)) + sign * v
            if s:
                store[k] = s
            else:
                store.pop(k, None)
        return SymMatrix._trusted(self._order, store)

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        return self._combine(other, 1)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return self._combine(other, -1)

    def __neg__(self) -> "SymMatrix":
        return SymMatrix._trusted(self._order, {k: -v for k, v in self._entries.items()})

    def __mul__(self, scalar: Number) -> "SymMatrix":
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        scalar = Fraction(scalar)
        if scalar == 0:
            return SymMatrix.zeros(self._order)
        return SymMatrix._trusted(self._order, {k: scalar * v for k, v in self._entries.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self._order == other._order and self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._order, frozenset(self._entries.items())))
        return self._hash

    def __repr__(self) -> str:
        rows = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.to_rows())
        return f"SymMatrix([{rows}])"


def _check_order(a: SymMatrix, b: SymMatrix) -> None:
    if a.order != b.order:
        raise ValueError(f"dimension mismatch: order {a.order} vs {b.order}")


def trace_inner(a: SymMatrix, b: SymMatrix) -> Fraction:
    """Trace inner product ``sum_{i,j} a_ij b_ij``, exact."""
    _check_order(a, b)
    small, large = (a, b) if a.nnz <= b.nnz else (b, a)
    lookup = large._entries
    diag = Fraction(0)
    off = Fraction(0)
    for k, v in small._entries.items():
        w = lookup.get(k)
        if w is None:
            continue
        if k[0] == k[1]:
            diag += v * w
        else:
            off += v * w
    return diag + 2 * off


def quad_form(m: SymMatrix, v: Sequence[Number]) -> Fraction:
    """Return ``v^T m v`` exactly."""
    if len(v) != m.order:
        raise ValueError(f"dimension mismatch: vector of length {len(v)} for order {m.order}")
    v = [Fraction(x) for x in v]
    total = Fraction(0)
    for (i, j), x in m.items():
        term = x * v[i] * v[j]
        total += term if i == j else 2 * term
    return total


@dataclass(frozen=True)
class PSD:
    rank: int


@dataclass(frozen=True)
class NotPSD:
    """Certificate of indefiniteness: ``witness^T m witness < 0``."""

    witness: tuple[Fraction, ...]


def psd_certify(m: SymMatrix) -> PSD | NotPSD:
    """Decide positive semidefiniteness exactly by pivoted LDL^T elimination.

    At each step the largest remaining diagonal entry is used as pivot.  Once
    no positive pivot is left, any negative diagonal or nonzero off-diagonal
    entry in the remainder yields a witness vector; otherwise the rank is the
    number of positive pivots taken.
    """
    n = m.order
    # Schur complement on the live index set, kept as full symmetric rows of nonzeros
    rows: dict[int, dict[int, Fraction]] = {i: {} for i in range(n)}
    for (i, j), v in m.items():
        rows[i][j] = v
        rows[j][i] = v
    steps: list[tuple[int, dict[int, Fraction]]] = []
    while rows:
        p = max(rows, key=lambda i: rows[i].get(i, 0))
        d = rows[p].get(p, Fraction(0))
        if d <= 0:
            q = min(rows, key=lambda i: rows[i].get(i, 0))
            if rows[q].get(q, 0) < 0:
                return NotPSD(_witness({q: Fraction(1)}, steps, n))
            for i, row in rows.items():
                for j, v in row.items():
                    if j != i:
                        return NotPSD(_witness({i: Fraction(1), j: Fraction(-1 if v > 0 else 1)}, steps, n))
            break
        col = {j: v for j, v in rows.pop(p).items() if j != p}
        for j in col:
            del rows[j][p]
        factors = {}
        for i, a in col.items():
            ri = rows[i]
            f = factors[i] = a / d
            for j, b in col.items():
                if j < i:
                    continue
                s = ri.get(j, Fraction(0)) - f * b
                if s:
                    ri[j] = s
                    rows[j][i] = s
                else:
                    ri.pop(j, None)
                    rows[j].pop(i, None)
        steps.append((p, factors))
    return PSD(len(steps))


def _witness(live: dict[int, Fraction], steps: list[tuple[int, dict[int, Fraction]]], n: int) -> tuple[Fraction, ...]:
    # Eliminating pivot p replaced each live basis vector t_i by t_i - f_i t_p;
    # undo the steps in reverse to express the combination in original coordinates.
    coef = dict(live)
    for p, factors in reversed(steps):
        coef[p] = -sum((coef.get(i, 0) * f for i, f in factors.items()), Fraction(0))
    return tuple(coef.get(i, Fraction(0)) for i in range(n))


class PivotError(ArithmeticError):
    """Raised when a Schur reduction meets a nonpositive pivot."""


def schur_reduce(m: SymMatrix, k: int | None = None) -> SymMatrix:
    """Eliminate the last index: return ``H - b b^T / c`` of order ``k - 1``.

    ``k`` is the 1-based index being removed and must equal ``m.order``.
    """
    n = m.order
    if k is None:
        k = n
    if k != n:
        raise ValueError(f"reduction index {k} must be the last index {n}")
    if n < 2:
        raise ValueError("cannot reduce a matrix of order 1")
    last = n - 1
    c = m[last, last]
    if c <= 0:
        raise PivotError(f"pivot {c} at index {k} not positive; fall back to psd_certify")
    store = {key: v for key, v in m.items() if key[1] != last}
    col = [(i, v) for (i, j), v in m.items() if j == last and i != last]
    for i, a in col:
        for j, b in col:
            if j < i:
                continue
            key = (i, j)
            s = store.get(key, Fraction(0)) - a * b / c
            if s:
                store[key] = s
            else:
                store.pop(key, None)
    return SymMatrix._trusted(n - 1, store)


def format_decimal(x: Number, digits: int = 17) -> str:
    """Render an exact rational with ``digits`` significant digits, half-even.

    Trailing zeros are dropped and scientific notation is never used, so
    ``format_decimal(Fraction(1, 4)) == "0.25"``.
    """
    x = Fraction(x)
    ctx = Context(prec=digits, rounding=ROUND_HALF_EVEN)
    d = ctx.divide(Decimal(x.numerator), Decimal(x.denominator))
    if d == 0:
        return "0"
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text

