"""Exact-rational phase-one simplex for feasibility of ``A x = b, x >= 0``.

Pivoting follows Bland's rule, so the search terminates and is deterministic.
No floating point is used anywhere.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Number = int | Fraction


class SimplexError(RuntimeError):
    pass


def find_feasible_point(
    a: Sequence[Sequence[Number]], b: Sequence[Number], max_pivots: int = 100_000
) -> list[Fraction] | None:
    """Return a vertex of ``{x >= 0 : A x = b}`` or ``None`` when it is empty.

    Artificial variables ``s`` with ``A x + s = |b|`` (rows sign-flipped so
    ``b >= 0``) start in the basis; phase one minimises ``sum(s)``.
    """
    m = len(a)
    nvar = len(a[0]) if m else 0
    if len(b) != m:
        raise ValueError("row count mismatch between A and b")
    if m == 0:
        return [Fraction(0)] * nvar

    # tableau rows: [x_0..x_{nvar-1}, s_0..s_{m-1} | rhs]
    width = nvar + m
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [Fraction(sign * v) for v in a[i]] + [Fraction(0)] * m
        row[nvar + i] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(sign * b[i]))
    basis = [nvar + i for i in range(m)]

    # reduced costs for min sum(s): c_j - c_B B^-1 A_j
    cost = [Fraction(0)] * width
    for i in range(m):
        for j in range(nvar):
            cost[j] -= rows[i][j]

    for _ in range(max_pivots):
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            coef = rows[i][enter]
            if coef > 0:
                ratio = rhs[i] / coef
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise SimplexError("phase-one objective unbounded")  # pragma: no cover
        _pivot(rows, rhs, cost, leave, enter)
        basis[leave] = enter
    else:
        raise SimplexError(f"no convergence after {max_pivots} pivots")

    residual = sum((rhs[i] for i in range(m) if basis[i] >= nvar), Fraction(0))
    if residual != 0:
        return None
    x = [Fraction(0)] * nvar
    for i, var in enumerate(basis):
        if var < nvar:
            x[var] = rhs[i]
    return x


def _pivot(rows, rhs, cost, r: int, c: int) -> None:
    prow = rows[r]
    inv = 1 / prow[c]
    nz = [j for j, v in enumerate(prow) if v]
    for j in nz:
        prow[j] *= inv
    rhs[r] *= inv
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row[c]
        if f:
            for j in nz:
                row[j] -= f * prow[j]
            rhs[i] -= f * rhs[r]
    f = cost[c]
    if f:
        for j in nz:
            cost[j] -= f * prow[j]
