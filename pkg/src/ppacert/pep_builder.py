"""SDP data for the proximal point performance estimation problem.

The Gram variable ``X`` has order ``N + 2`` and row ``a`` (0-based) belongs to
iterate ``w^a``.  Constraint labels follow iteration numbers: ``a_mats[(i, j)]``
for ``1 <= i < j <= N + 1`` encodes monotonicity between the pairs
``(w^i, w^{i-1} - w^i)`` and ``(w^j, w^{j-1} - w^j)``; ``b_mats[i - 1]`` encodes
monotonicity between pair ``i`` and the anchor ``(0, 0)``.  Every value
``<A, X>`` is twice the corresponding inner product of the iterates.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import IO, Mapping, Sequence, Union

import numpy as np

from .rational_linalg import SymMatrix, format_decimal, trace_inner

__all__ = [
    "PepInstance",
    "InterpolationReport",
    "ConstraintValues",
    "SdpaProblem",
    "build_instance",
    "check_interpolable",
    "constraint_values",
    "export_sdpa",
    "read_sdpa",
]

FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class PepInstance:
    n_iters: int
    order: int
    a_mats: Mapping[tuple[int, int], SymMatrix]
    b_mats: tuple[SymMatrix, ...]
    e11: SymMatrix
    c_mat: SymMatrix

    def constraints(self) -> list[tuple[str, SymMatrix]]:
        """Inequality constraints ``<F, X> >= 0`` in export order, with labels."""
        out = [(f"A[{i},{j}]", m) for (i, j), m in self.a_mats.items()]
        out += [(f"B[{i}]", m) for i, m in enumerate(self.b_mats, start=1)]
        return out


def _unit(order: int, *terms: tuple[int, int]) -> dict[int, int]:
    # terms are (1-based unit-vector index, coefficient)
    vec: dict[int, int] = {}
    for idx, coef in terms:
        vec[idx - 1] = vec.get(idx - 1, 0) + coef
    return {k: v for k, v in vec.items() if v}


@lru_cache(maxsize=8)
def build_instance(n_iters: int) -> PepInstance:
    """Return the matrices ``A_{i,j}``, ``B_i``, ``E_11`` and ``C`` for ``N`` steps."""
    if n_iters < 1:
        raise ValueError(f"need at least one iteration, got {n_iters}")
    n = n_iters + 2
    a_mats = {}
    for i in range(1, n_iters + 2):
        for j in range(i + 1, n_iters + 2):
            diff = _unit(n, (i + 1, 1), (j + 1, -1))
            xi = _unit(n, (i, 1), (i + 1, -1), (j, -1), (j + 1, 1))
            a_mats[(i, j)] = SymMatrix.outer_sum(n, diff, xi)
    b_mats = tuple(
        SymMatrix.outer_sum(n, _unit(n, (i + 1, 1)), _unit(n, (i, 1), (i + 1, -1)))
        for i in range(1, n_iters + 2)
    )
    e11 = SymMatrix(n, {(0, 0): 1})
    c_mat = SymMatrix(n, {(n - 2, n - 2): 1, (n - 2, n - 1): -1, (n - 1, n - 1): 1})
    return PepInstance(n_iters, n, a_mats, b_mats, e11, c_mat)


@dataclass(frozen=True)
class ConstraintValues:
    a_vals: dict[tuple[int, int], Fraction]
    b_vals: list[Fraction]
    e_val: Fraction
    objective: Fraction


def constraint_values(inst: PepInstance, x: SymMatrix) -> ConstraintValues:
    """Evaluate every constraint and the objective of the SDP at ``x``."""
    if x.order != inst.order:
        raise ValueError(f"dimension mismatch: X has order {x.order}, instance needs {inst.order}")
    # constraint matrices are integral, so work on D*X with integer entries
    denom = x.common_denominator()
    scaled = {k: v.numerator * (denom // v.denominator) for k, v in x.items()}

    def value(m: SymMatrix) -> Fraction:
        total = 0
        for k, coef in m.items():
            if coef.denominator != 1:
                return trace_inner(m, x)
            e = scaled.get(k)
            if e is not None:
                total += coef.numerator * e * (1 if k[0] == k[1] else 2)
        return Fraction(total, denom)

    return ConstraintValues(
        a_vals={key: value(m) for key, m in inst.a_mats.items()},
        b_vals=[value(m) for m in inst.b_mats],
        e_val=trace_inner(inst.e11, x),
        objective=trace_inner(inst.c_mat, x),
    )


@dataclass(frozen=True)
class InterpolationReport:
    pair_products: dict[tuple[int, int], Union[Fraction, float]]
    anchor_products: list[Union[Fraction, float]]
    interpolable: bool


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def check_interpolable(points: Sequence[tuple[Sequence, Sequence]], include_anchor: bool = True) -> InterpolationReport:
    """Check the monotone interpolation conditions for ``[(w_k, u_k), ...]``.

    ``pair_products[(i, j)]`` is ``<w_i - w_j, u_i - u_j>`` for list positions
    ``i < j``; with ``include_anchor`` the pair ``(0, 0)`` is appended to the set
    and ``anchor_products[i]`` is ``<w_i, u_i>``.  Exact inputs (ints and
    Fractions) are compared against zero exactly, anything else with a slack
    of ``1e-12``.
    """
    if not points:
        return InterpolationReport({}, [], True)
    dim = len(points[0][0])
    for w, u in points:
        if len(w) != dim or len(u) != dim:
            raise ValueError("all points and values must share one dimension")
    exact = all(_is_exact(c) for w, u in points for c in (*w, *u))
    if exact:
        pts = [([Fraction(c) for c in w], [Fraction(c) for c in u]) for w, u in points]
        slack = 0
    else:
        pts = [(np.asarray(w, dtype=float), np.asarray(u, dtype=float)) for w, u in points]
        slack = FLOAT_SLACK

    def dot(a, b):
        if exact:
            return sum((p * q for p, q in zip(a, b)), Fraction(0))
        return float(np.dot(a, b))

    pair = {}
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            wi, ui = pts[i]
            wj, uj = pts[j]
            pair[(i, j)] = dot([a - b for a, b in zip(wi, wj)], [a - b for a, b in zip(ui, uj)])
    anchor = [dot(w, u) for w, u in pts] if include_anchor else []
    ok = all(v >= -slack for v in pair.values()) and all(v >= -slack for v in anchor)
    return InterpolationReport(pair, anchor, ok)


# --- SDPA export -------------------------------------------------------------
#
# Sparse SDPA describes  max <F0, Y>  s.t.  <F_k, Y> = c_k,  Y psd.  Y carries
# two blocks: X itself and a diagonal block of slacks s >= 0, one per row.
# Row k reads  <F_k, X> - s_k = c_k,  i.e.  <F_k, X> >= c_k.


@dataclass(frozen=True)
class SdpaProblem:
    """Content of a sparse SDPA file, with block 1 symmetric and block 2 diagonal."""

    rhs: tuple[Fraction, ...]
    block_sizes: tuple[int, ...]
    objective: SymMatrix
    constraints: tuple[SymMatrix, ...]
    slack: tuple[dict[int, Fraction], ...]


def _sdpa_rows(inst: PepInstance) -> tuple[list[SymMatrix], list[int]]:
    mats = [m for _, m in inst.constraints()]
    rhs = [0] * len(mats)
    # <E11, X> = 1 as the pair  <E11, X> >= 1  and  <-E11, X> >= -1
    mats += [inst.e11, -inst.e11]
    rhs += [1, -1]
    return mats, rhs


def export_sdpa(inst: PepInstance, destination: Union[str, os.PathLike, IO[str]]) -> None:
    """Write the primal SDP in sparse SDPA (``.dat-s``) format."""
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="ascii") as fh:
            _write_sdpa(inst, fh)
    else:
        _write_sdpa(inst, destination)


def _write_sdpa(inst: PepInstance, out: IO[str]) -> None:
    mats, rhs = _sdpa_rows(inst)
    m = len(mats)
    buf = io.StringIO()
    buf.write(f'"PEP of the proximal point method, N={inst.n_iters}: maximize <C,X>\n')
    buf.write(f"{m}\n2\n{inst.order} -{m}\n")
    buf.write(" ".join(format_decimal(c) for c in rhs) + "\n")
    for (i, j), v in sorted(inst.c_mat.items()):
        buf.write(f"0 1 {i + 1} {j + 1} {format_decimal(v)}\n")
    for k, mat in enumerate(mats, start=1):
        for (i, j), v in sorted(mat.items()):
            buf.write(f"{k} 1 {i + 1} {j + 1} {format_decimal(v)}\n")
        buf.write(f"{k} 2 {k} {k} -1\n")
    out.write(buf.getvalue())


def _tokens(line: str) -> list[str]:
    # SDPA allows ",(){}" as separators
    for ch in ",(){}":
        line = line.replace(ch, " ")
    return line.split()


def read_sdpa(source: Union[str, os.PathLike, IO[str]]) -> SdpaProblem:
    """Parse a sparse SDPA file written by :func:`export_sdpa`."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="ascii") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and ln.lstrip()[0] not in '"*']
    m = int(_tokens(lines[0])[0])
    nblocks = int(_tokens(lines[1])[0])
    sizes = tuple(int(t) for t in _tokens(lines[2])[:nblocks])
    rhs = tuple(Fraction(t) for t in _tokens(lines[3])[:m])
    order = abs(sizes[0])
    sym: list[dict] = [dict() for _ in range(m + 1)]
    diag: list[dict] = [dict() for _ in range(m + 1)]
    for ln in lines[4:]:
        k, blk, i, j, val = _tokens(ln)[:5]
        k, blk, i, j, val = int(k), int(blk), int(i), int(j), Fraction(val)
        if blk == 1:
            sym[k][(i - 1, j - 1)] = val
        else:
            diag[k][i] = val
    return SdpaProblem(
        rhs=rhs,
        block_sizes=sizes,
        objective=SymMatrix(order, sym[0]),
        constraints=tuple(SymMatrix(order, s) for s in sym[1:]),
        slack=tuple(diag[1:]),
    )
