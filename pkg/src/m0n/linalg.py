"""Exact row reduction over the rationals on sparse rows.

A row is a ``dict`` mapping column index to a nonzero ``Fraction``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable

Row = dict[int, Fraction]


def _axpy(target: Row, scale: Fraction, source: Row) -> None:
    # target += scale * source, dropping zeros
    for c, v in source.items():
        nv = target.get(c, 0) + scale * v
        if nv:
            target[c] = nv
        else:
            target.pop(c, None)


def rref(rows: Iterable[Row], ncols: int) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form.

    Pivots are chosen left to right, so the column order fixes the result.
    Returns ``(basis_rows, pivots)`` with ``basis_rows[k]`` having a 1 in
    column ``pivots[k]`` and zeros in every other pivot column.
    """
    work = [dict(r) for r in rows if r]
    basis: list[Row] = []
    pivots: list[int] = []
    for col in range(ncols):
        hit = None
        for idx, r in enumerate(work):
            if col in r:
                hit = idx
                break
        if hit is None:
            continue
        prow = work.pop(hit)
        inv = 1 / Fraction(prow[col])
        prow = {c: v * inv for c, v in prow.items()}
        for r in work:
            if col in r:
                _axpy(r, -r[col], prow)
        for r in basis:
            if col in r:
                _axpy(r, -r[col], prow)
        work = [r for r in work if r]
        basis.append(prow)
        pivots.append(col)
    return basis, pivots


def reduce_vector(vec: Row, basis: list[Row], pivots: list[int]) -> Row:
    """Reduce ``vec`` against an RREF basis; the result vanishes on pivots."""
    out = dict(vec)
    for prow, p in zip(basis, pivots):
        coef = out.get(p)
        if coef:
            _axpy(out, -coef, prow)
    return out


def rank(rows: Iterable[Row], ncols: int) -> int:
    return len(rref(rows, ncols)[1])
