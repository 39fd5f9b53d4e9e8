"""Boundary divisors on M_{0,n}: Keel relations, normal forms and F-curve pairing."""
from __future__ import annotations

import functools
import itertools
import json
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from m0n.linalg import Row, reduce_vector, rref

Number = int | Fraction


class InvalidBoundaryError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 4:
        raise ValueError(f"number of marked points must be an integer >= 4, got {n!r}")


@dataclass(frozen=True, order=False)
class BoundaryIndex:
    """Canonical subset naming the boundary divisor B_I (= B_{I^c})."""

    n: int
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        k = len(self.elements)
        if not 2 <= k <= self.n - 2:
            raise InvalidBoundaryError(f"|I| = {k} outside [2, {self.n - 2}]")
        if tuple(sorted(set(self.elements))) != self.elements:
            raise InvalidBoundaryError(f"elements must be sorted and distinct: {self.elements}")
        if self.elements[0] < 1 or self.elements[-1] > self.n:
            raise InvalidBoundaryError(f"elements must lie in 1..{self.n}")
        if not (2 * k < self.n or (2 * k == self.n and self.elements[0] == 1)):
            raise InvalidBoundaryError(f"{self.elements} is not the canonical representative")

    @property
    def size(self) -> int:
        return len(self.elements)

    def complement(self) -> frozenset[int]:
        return frozenset(range(1, self.n + 1)) - set(self.elements)

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (len(self.elements), self.elements)

    def __lt__(self, other: "BoundaryIndex") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return "B{" + ",".join(map(str, self.elements)) + "}"


def canonical_boundary(n: int, subset: Iterable[int]) -> BoundaryIndex:
    """Canonical representative of the pair {I, I^c}.

    The smaller set wins; when both halves have size n/2 the one containing 1 wins.
    """
    _check_n(n)
    s = set(subset)
    if any(not 1 <= x <= n for x in s):
        raise InvalidBoundaryError(f"subset {sorted(s)} not contained in 1..{n}")
    if not 2 <= len(s) <= n - 2:
        raise InvalidBoundaryError(f"|I| = {len(s)} outside [2, {n - 2}]")
    comp = set(range(1, n + 1)) - s
    if len(comp) < len(s) or (len(comp) == len(s) and 1 in comp):
        s = comp
    return BoundaryIndex(n, tuple(sorted(s)))


@functools.lru_cache(maxsize=None)
def boundary_indices(n: int) -> tuple[BoundaryIndex, ...]:
    """All canonical boundary indices, ordered by (size, lexicographic)."""
    _check_n(n)
    out = []
    for k in range(2, n // 2 + 1):
        for c in itertools.combinations(range(1, n + 1), k):
            if 2 * k == n and c[0] != 1:
                continue
            out.append(BoundaryIndex(n, c))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _column_of(n: int) -> dict[BoundaryIndex, int]:
    return {b: i for i, b in enumerate(boundary_indices(n))}


def _clean(d: Mapping) -> dict:
    return {k: Fraction(v) for k, v in d.items() if v != 0}


class DivisorClass:
    """Exact-rational combination of boundary classes B_I and psi classes psi_i.

    Coefficient maps are sparse: zero entries are never stored.
    """

    __slots__ = ("n", "boundary", "psi")

    def __init__(
        self,
        n: int,
        boundary: Mapping[BoundaryIndex, Number] | None = None,
        psi: Mapping[int, Number] | None = None,
    ) -> None:
        _check_n(n)
        b = _clean(boundary or {})
        p = _clean(psi or {})
        for k in b:
            if not isinstance(k, BoundaryIndex) or k.n != n:
                raise DimensionMismatchError(f"boundary key {k} does not belong to n={n}")
        for i in p:
            if not 1 <= i <= n:
                raise ValueError(f"psi index {i} outside 1..{n}")
        self.n = n
        self.boundary: dict[BoundaryIndex, Fraction] = dict(sorted(b.items()))
        self.psi: dict[int, Fraction] = dict(sorted(p.items()))

    @classmethod
    def zero(cls, n: int) -> "DivisorClass":
        return cls(n)

    @classmethod
    def b(cls, n: int, subset: Iterable[int], coeff: Number = 1) -> "DivisorClass":
        return cls(n, {canonical_boundary(n, subset): coeff})

    @classmethod
    def psi_i(cls, n: int, i: int, coeff: Number = 1) -> "DivisorClass":
        return cls(n, psi={i: coeff})

    def _same_n(self, other: "DivisorClass") -> None:
        if not isinstance(other, DivisorClass):
            raise TypeError(f"expected DivisorClass, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatchError(f"n={self.n} vs n={other.n}")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._same_n(other)
        b = dict(self.boundary)
        for k, v in other.boundary.items():
            b[k] = b.get(k, 0) + v
        p = dict(self.psi)
        for k, v in other.psi.items():
            p[k] = p.get(k, 0) + v
        return DivisorClass(self.n, b, p)

    def __neg__(self) -> "DivisorClass":
        return self * -1

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __mul__(self, c: Number) -> "DivisorClass":
        c = Fraction(c)
        return DivisorClass(
            self.n,
            {k: v * c for k, v in self.boundary.items()},
            {k: v * c for k, v in self.psi.items()},
        )

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DivisorClass):
            return NotImplemented
        return self.n == other.n and self.boundary == other.boundary and self.psi == other.psi

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.boundary.items()), tuple(self.psi.items())))

    def is_zero(self) -> bool:
        return not self.boundary and not self.psi

    def has_psi(self) -> bool:
        return bool(self.psi)

    def support(self) -> list[BoundaryIndex]:
        return list(self.boundary)

    def to_row(self) -> Row:
        col = _column_of(self.n)
        return {col[k]: v for k, v in self.boundary.items()}

    @classmethod
    def from_row(cls, n: int, row: Mapping[int, Number], psi: Mapping[int, Number] | None = None):
        idx = boundary_indices(n)
        return cls(n, {idx[c]: v for c, v in row.items()}, psi)

    def __repr__(self) -> str:
        from m0n.expr import format_divisor

        return f"DivisorClass(n={self.n}, {format_divisor(self)!r})"


@dataclass(frozen=True)
class FCurve:
    """F-curve class attached to a partition of [n] into four nonempty blocks."""

    n: int
    parts: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        parts = tuple(sorted((frozenset(p) for p in self.parts), key=lambda p: min(p) if p else 0))
        object.__setattr__(self, "parts", parts)
        if len(parts) != 4 or any(not p for p in parts):
            raise ValueError("an F-curve needs exactly 4 nonempty blocks")
        union = frozenset().union(*parts)
        if sum(map(len, parts)) != len(union) or union != frozenset(range(1, self.n + 1)):
            raise ValueError(f"blocks must partition 1..{self.n}")

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "FCurve":
        parts = tuple(frozenset(b) for b in blocks)
        return cls(sum(len(p) for p in parts), parts)

    @classmethod
    def of_type(cls, sizes: Iterable[int]) -> "FCurve":
        """Representative F-curve with consecutive blocks of the given sizes."""
        sizes = list(sizes)
        if len(sizes) != 4 or any(a < 1 for a in sizes):
            raise ValueError(f"F-curve type needs 4 positive sizes, got {sizes}")
        blocks, start = [], 1
        for a in sizes:
            blocks.append(range(start, start + a))
            start += a
        return cls.from_blocks(blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(sorted(len(p) for p in self.parts))

    @functools.cached_property
    def _signature(self) -> tuple[frozenset[BoundaryIndex], frozenset[BoundaryIndex], frozenset[int]]:
        plus = set()
        for a, b in itertools.combinations(self.parts, 2):
            plus.add(canonical_boundary(self.n, a | b))
        minus = {canonical_boundary(self.n, p) for p in self.parts if len(p) >= 2}
        singles = {next(iter(p)) for p in self.parts if len(p) == 1}
        return frozenset(plus), frozenset(minus), frozenset(singles)

    def permuted(self, perm: Mapping[int, int]) -> "FCurve":
        return FCurve(self.n, tuple(frozenset(perm[x] for x in p) for p in self.parts))

    def __str__(self) -> str:
        return "F" + "".join("{" + ",".join(map(str, sorted(p))) + "}" for p in self.parts)


def pair_fcurve(curve: FCurve, divisor: DivisorClass) -> Fraction:
    """Intersection number of an F-curve with a divisor class.

    Each canonical boundary class contributes once: +1 when one of its
    representatives is a union of two blocks, -1 when one is a single block.
    """
    if curve.n != divisor.n:
        raise DimensionMismatchError(f"curve has n={curve.n}, divisor has n={divisor.n}")
    plus, minus, singles = curve._signature
    total = Fraction(0)
    for b, c in divisor.boundary.items():
        if b in plus:
            total += c
        elif b in minus:
            total -= c
    for i, c in divisor.psi.items():
        if i in singles:
            total += c
    return total


def set_partitions_4(n: int) -> Iterator[FCurve]:
    """Every F-curve on M_{0,n}: set partitions of 1..n into 4 blocks."""

    def rec(i: int, blocks: list[list[int]]) -> Iterator[list[list[int]]]:
        if i > n:
            if len(blocks) == 4:
                yield blocks
            return
        if len(blocks) + (n - i + 1) < 4:
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        if len(blocks) < 4:
            blocks.append([i])
            yield from rec(i + 1, blocks)
            blocks.pop()

    for blocks in rec(1, []):
        yield FCurve(n, tuple(frozenset(b) for b in blocks))


# --------------------------------------------------------------------------
# Keel relations

def picard_dimension(n: int) -> int:
    return 2 ** (n - 1) - comb(n, 2) - 1


def _separates(b: BoundaryIndex, left: tuple[int, int], right: tuple[int, int]) -> bool:
    s = set(b.elements)
    return (left[0] in s and left[1] in s and right[0] not in s and right[1] not in s) or (
        right[0] in s and right[1] in s and left[0] not in s and left[1] not in s
    )


def keel_relation(n: int, i: int, j: int, k: int, l: int) -> DivisorClass:
    """sum over B_I separating {i,j}|{k,l} minus sum over B_I separating {i,k}|{j,l}."""
    if len({i, j, k, l}) != 4:
        raise ValueError("Keel relation needs four distinct points")
    coeffs: dict[BoundaryIndex, int] = {}
    for b in boundary_indices(n):
        v = int(_separates(b, (i, j), (k, l))) - int(_separates(b, (i, k), (j, l)))
        if v:
            coeffs[b] = v
    return DivisorClass(n, coeffs)


@dataclass(frozen=True)
class RelationBasis:
    n: int
    relations: tuple[DivisorClass, ...]
    rows: tuple[Row, ...] = field(repr=False)
    pivots: tuple[int, ...]

    @property
    def columns(self) -> tuple[BoundaryIndex, ...]:
        return boundary_indices(self.n)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def quotient_dimension(self) -> int:
        return len(self.columns) - self.rank

    @functools.cached_property
    def free_columns(self) -> tuple[int, ...]:
        piv = set(self.pivots)
        return tuple(c for c in range(len(self.columns)) if c not in piv)

    def reduce_row(self, row: Row) -> Row:
        return reduce_vector(row, list(self.rows), list(self.pivots))


def _generate_relations(n: int) -> list[DivisorClass]:
    seen: dict[tuple, DivisorClass] = {}
    for quad in itertools.permutations(range(1, n + 1), 4):
        rel = keel_relation(n, *quad)
        for r in (rel, -rel):
            if r.is_zero():
                continue
            first = next(iter(r.boundary.values()))
            if first < 0:
                continue
            seen.setdefault(tuple(r.boundary.items()), r)
    return [seen[k] for k in sorted(seen, key=lambda t: [(b.sort_key(), v) for b, v in t])]


def _cache_path(n: int) -> Path | None:
    root = os.environ.get("M0N_CACHE_DIR")
    if not root:
        return None
    return Path(root) / f"keel_rref_n{n}.json"


def _load_cached(n: int) -> tuple[list[Row], list[int]] | None:
    path = _cache_path(n)
    if path is None or not path.exists():
        return None
    try:
        data = json.loads(path.read_text())
        rows = [{int(c): Fraction(v) for c, v in r.items()} for r in data["rows"]]
        return rows, [int(p) for p in data["pivots"]]
    except (OSError, ValueError, KeyError):
        return None


def _store_cached(n: int, rows: list[Row], pivots: list[int]) -> None:
    path = _cache_path(n)
    if path is None:
        return
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"rows": [{str(c): str(v) for c, v in r.items()} for r in rows], "pivots": pivots}
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload))
        tmp.replace(path)
    except OSError:
        pass


_basis_lock = threading.Lock()
_basis_cache: dict[int, RelationBasis] = {}


def keel_relations(n: int) -> RelationBasis:
    """Keel relations on M_{0,n} with a deterministic reduced echelon form.

    Built once per n; later calls return the cached object.
    """
    _check_n(n)
    cached = _basis_cache.get(n)
    if cached is not None:
        return cached
    with _basis_lock:
        if n in _basis_cache:
            return _basis_cache[n]
        rels = _generate_relations(n)
        loaded = _load_cached(n)
        if loaded is None:
            rows, pivots = rref([r.to_row() for r in rels], len(boundary_indices(n)))
            _store_cached(n, rows, pivots)
        else:
            rows, pivots = loaded
        basis = RelationBasis(n, tuple(rels), tuple(rows), tuple(pivots))
        _basis_cache[n] = basis
        return basis


def normal_form(divisor: DivisorClass) -> DivisorClass:
    """Unique representative modulo Keel relations; psi coordinates pass through."""
    basis = keel_relations(divisor.n)
    row = basis.reduce_row(divisor.to_row())
    return DivisorClass.from_row(divisor.n, row, divisor.psi)


def class_equal(d1: DivisorClass, d2: DivisorClass) -> bool:
    """Equality in N^1 for boundary parts; psi coordinates are compared as-is."""
    if d1.n != d2.n:
        raise DimensionMismatchError(f"n={d1.n} vs n={d2.n}")
    diff = d1 - d2
    if diff.psi:
        return False
    return normal_form(diff).is_zero()
