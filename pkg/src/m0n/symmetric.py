"""The S_n-invariant slice of N^1: symmetric classes, test curves and the n=7 chambers."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from m0n.core import (
    DimensionMismatchError,
    DivisorClass,
    FCurve,
    boundary_indices,
    class_equal,
    pair_fcurve,
)

Number = int | Fraction


class SymmetricDivisor:
    """Coordinates in the basis B_2, ..., B_{floor(n/2)}."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Iterable[Number]) -> None:
        coeffs = tuple(Fraction(c) for c in coeffs)
        if n < 4:
            raise ValueError(f"n must be >= 4, got {n}")
        if len(coeffs) != n // 2 - 1:
            raise ValueError(f"n={n} needs {n // 2 - 1} coordinates, got {len(coeffs)}")
        self.n = n
        self.coeffs = coeffs

    @classmethod
    def basis(cls, n: int, i: int) -> "SymmetricDivisor":
        """B_i; sizes above n/2 fold onto B_{n-i}."""
        if not 2 <= i <= n - 2:
            raise ValueError(f"B_{i} undefined for n={n}")
        i = min(i, n - i)
        v = [0] * (n // 2 - 1)
        v[i - 2] = 1
        return cls(n, v)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[min(i, self.n - i) - 2]

    def _same_n(self, other: "SymmetricDivisor") -> None:
        if other.n != self.n:
            raise DimensionMismatchError(f"n={self.n} vs n={other.n}")

    def __add__(self, other: "SymmetricDivisor") -> "SymmetricDivisor":
        self._same_n(other)
        return SymmetricDivisor(self.n, (a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "SymmetricDivisor") -> "SymmetricDivisor":
        return self + other * -1

    def __mul__(self, c: Number) -> "SymmetricDivisor":
        return SymmetricDivisor(self.n, (a * c for a in self.coeffs))

    __rmul__ = __mul__

    def __neg__(self) -> "SymmetricDivisor":
        return self * -1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymmetricDivisor):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.n, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __repr__(self) -> str:
        return f"SymmetricDivisor({self.n}, ({', '.join(map(str, self.coeffs))}))"


def expand_symmetric(s: SymmetricDivisor) -> DivisorClass:
    """Distribute each B_i coordinate over the canonical boundary classes of size i."""
    coeffs = {}
    for b in boundary_indices(s.n):
        c = s.coeffs[b.size - 2]
        if c:
            coeffs[b] = c
    return DivisorClass(s.n, coeffs)


def canonical_and_psi(n: int) -> tuple[SymmetricDivisor, SymmetricDivisor]:
    """(K, psi) with K = sum (i(n-i)/(n-1) - 2) B_i and psi = K + 2B."""
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    k = SymmetricDivisor(n, (Fraction(i * (n - i), n - 1) - 2 for i in range(2, n // 2 + 1)))
    total_b = SymmetricDivisor(n, [1] * (n // 2 - 1))
    return k, k + total_b * 2


class NotSymmetricError(ValueError):
    pass


def as_symmetric(d: DivisorClass) -> SymmetricDivisor:
    """Symmetric coordinates of an S_n-invariant class.

    The orbit average of the boundary coordinates represents the Reynolds
    projection; the class is invariant iff it equals that average. Individual
    psi_i are accepted only with equal coefficients (they then sum to psi).
    """
    n = d.n
    psi_part = SymmetricDivisor(n, [0] * (n // 2 - 1))
    if d.psi:
        vals = set(d.psi.values())
        if len(d.psi) != n or len(vals) != 1:
            raise NotSymmetricError("psi_i coefficients are not all equal")
        psi_part = canonical_and_psi(n)[1] * vals.pop()
    totals = [Fraction(0)] * (n // 2 - 1)
    counts = [0] * (n // 2 - 1)
    for b in boundary_indices(n):
        counts[b.size - 2] += 1
    for b, c in d.boundary.items():
        totals[b.size - 2] += c
    avg = SymmetricDivisor(n, (t / k for t, k in zip(totals, counts)))
    bare = DivisorClass(n, d.boundary)
    if bare != expand_symmetric(avg) and not class_equal(bare, expand_symmetric(avg)):
        raise NotSymmetricError("divisor class is not S_n-invariant")
    return avg + psi_part


# --------------------------------------------------------------------------
# Curve classes

# B_2, B_3 pairings of the curve A on M_{0,7}; psi and K follow by linearity
CURVE_A_PAIRINGS = {2: Fraction(-3), 3: Fraction(4)}


@dataclass(frozen=True)
class CurveClass:
    kind: str  # "fcurve" | "sweeping" | "A"
    n: int
    sizes: tuple[int, ...] = ()
    j: int = 0

    def __post_init__(self) -> None:
        if self.kind == "fcurve":
            sizes = tuple(sorted(self.sizes))
            object.__setattr__(self, "sizes", sizes)
            if len(sizes) != 4 or min(sizes) < 1 or sum(sizes) != self.n:
                raise ValueError(f"F-curve type {sizes} is not a 4-part partition of {self.n}")
        elif self.kind == "sweeping":
            if not 3 <= self.j <= self.n - 1:
                raise ValueError(f"C_{self.j} needs 3 <= j <= {self.n - 1}")
        elif self.kind == "A":
            if self.n != 7:
                raise ValueError("curve A is only defined on M_{0,7}")
        else:
            raise ValueError(f"unknown curve kind {self.kind!r}")

    @classmethod
    def fcurve(cls, *sizes: int) -> "CurveClass":
        return cls("fcurve", sum(sizes), sizes=tuple(sizes))

    @classmethod
    def sweeping(cls, n: int, j: int) -> "CurveClass":
        return cls("sweeping", n, j=j)

    @classmethod
    def curve_a(cls, n: int = 7) -> "CurveClass":
        return cls("A", n)

    def representative(self) -> FCurve:
        if self.kind != "fcurve":
            raise ValueError(f"{self} is not an F-curve type")
        return FCurve.of_type(self.sizes)

    def __str__(self) -> str:
        if self.kind == "fcurve":
            return "F" + ",".join(map(str, self.sizes))
        if self.kind == "sweeping":
            return f"C{self.j}"
        return "A"


def _sweeping_on_size(n: int, j: int, i: int) -> int:
    # C_j . (sum of boundary classes of size i), 2 <= i <= n-2
    if i == j - 1:
        return j
    if i == j:
        return -(j - 2)
    return 0


def pair_curve(curve: CurveClass, s: SymmetricDivisor) -> Fraction:
    if not isinstance(s, SymmetricDivisor):
        raise TypeError("pair_curve takes a SymmetricDivisor; use pair_fcurve for general classes")
    if curve.n != s.n:
        raise DimensionMismatchError(f"curve has n={curve.n}, divisor has n={s.n}")
    n = s.n
    if curve.kind == "fcurve":
        return pair_fcurve(curve.representative(), expand_symmetric(s))
    if curve.kind == "sweeping":
        total = Fraction(0)
        for i in range(2, n // 2 + 1):
            sizes = {i, n - i}
            total += s.coeffs[i - 2] * sum(_sweeping_on_size(n, curve.j, k) for k in sizes)
        return total
    return sum((CURVE_A_PAIRINGS[i] * s[i] for i in (2, 3)), Fraction(0))


def fcurve_types(n: int) -> Iterator[CurveClass]:
    """Integer partitions of n into 4 positive parts, ascending."""
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            for c in range(b, n + 1):
                d = n - a - b - c
                if d >= c:
                    yield CurveClass.fcurve(a, b, c, d)


TABLE_ROWS = ("F1,1,1,4", "F1,1,2,3", "F1,2,2,2", "C4", "C5", "C6", "A")
TABLE_COLUMNS = ("psi", "K", "B2", "B3")


def table_curves() -> list[CurveClass]:
    return [
        CurveClass.fcurve(1, 1, 1, 4),
        CurveClass.fcurve(1, 1, 2, 3),
        CurveClass.fcurve(1, 2, 2, 2),
        CurveClass.sweeping(7, 4),
        CurveClass.sweeping(7, 5),
        CurveClass.sweeping(7, 6),
        CurveClass.curve_a(),
    ]


def table_divisors() -> list[SymmetricDivisor]:
    k, psi = canonical_and_psi(7)
    return [psi, k, SymmetricDivisor.basis(7, 2), SymmetricDivisor.basis(7, 3)]


def intersection_table(n: int = 7) -> list[list[Fraction]]:
    """Curves F1114, F1123, F1222, C4, C5, C6, A against psi, K, B2, B3."""
    if n != 7:
        raise ValueError("the intersection table is defined for n = 7")
    return [[pair_curve(c, d) for d in table_divisors()] for c in table_curves()]


def nef_check(s: SymmetricDivisor) -> bool:
    """Nonnegative against every symmetric F-curve type."""
    return all(pair_curve(c, s) >= 0 for c in fcurve_types(s.n))


# --------------------------------------------------------------------------
# Chamber decomposition of the symmetric effective cone of M_{0,7}

M07 = "M̄₀,₇"
MODEL_LABELS = {
    1: M07,
    2: "M̄₀,A",
    3: "V_A^3",
    4: "M̄₀,₇³",
    5: "small contraction of M̄₀,₇³",
    6: "M̄₀,₇²",
    7: "M̄₀,₇¹",
    8: "point",
}

EMPTY, B3_LOCUS, B2_CUBED, B2_SQUARED, B2_LOCUS, EVERYTHING = (
    "empty", "B3", "B2^3", "B2^2", "B2", "everything",
)

# walls ordered from B3 towards B2, as (name, B2-coordinate, B3-coordinate)
WALLS = (
    ("B3", 0, 1),
    ("K+psi/3", 1, 3),
    ("psi-K", 1, 1),
    ("psi-3K", 4, 3),
    ("psi-5K", 5, 3),
    ("B2", 1, 0),
)

# (model item, base locus) on each wall and on each open sector between walls
_ON_WALL = {
    "B3": (8, B3_LOCUS),
    "K+psi/3": (2, EMPTY),
    "psi-K": (3, EMPTY),
    "psi-3K": (5, B2_CUBED),
    "psi-5K": (7, B2_SQUARED),
    "B2": (8, B2_LOCUS),
}
_OPEN = (
    (2, B3_LOCUS, "(B3, K+psi/3)"),
    (1, EMPTY, "(K+psi/3, psi-K)"),
    (4, B2_CUBED, "(psi-K, psi-3K)"),
    (6, B2_SQUARED, "(psi-3K, psi-5K)"),
    (7, B2_LOCUS, "(psi-5K, B2)"),
)


@dataclass(frozen=True)
class ChamberReport:
    chamber_id: str  # "item<k>" for the model classification, or "outside_effective"
    interval: str
    model_label: str
    stable_base_locus: str
    on_wall: bool
    wall_names: tuple[str, ...] = ()
    adjacent_models: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "chamber_id": self.chamber_id,
            "interval": self.interval,
            "model_label": self.model_label,
            "stable_base_locus": self.stable_base_locus,
            "on_wall": self.on_wall,
            "wall_names": list(self.wall_names),
            "adjacent_models": list(self.adjacent_models),
        }


def _cross(a: tuple[Number, Number], b: tuple[Number, Number]) -> Fraction:
    return Fraction(a[0]) * b[1] - Fraction(a[1]) * b[0]


def chamber_lookup(s: SymmetricDivisor) -> ChamberReport:
    if s.n != 7:
        raise ValueError("chamber lookup is implemented for n = 7 only")
    x, y = s.coeffs
    if x == 0 and y == 0:
        raise ValueError("the zero divisor has no chamber")
    if x < 0 or y < 0:
        return ChamberReport("outside_effective", "outside Eff", "none", EVERYTHING, False)
    ray = (x, y)
    for pos, (name, a, b) in enumerate(WALLS):
        if _cross(ray, (a, b)) == 0:
            item, locus = _ON_WALL[name]
            neighbours = []
            if pos > 0:
                neighbours.append(MODEL_LABELS[_OPEN[pos - 1][0]])
            if pos < len(_OPEN):
                neighbours.append(MODEL_LABELS[_OPEN[pos][0]])
            return ChamberReport(
                f"item{item}", name, MODEL_LABELS[item], locus, True, (name,), tuple(neighbours)
            )
    # walls run clockwise from (0,1) to (1,0); cross(ray, w) > 0 iff the ray is past w
    for pos in range(len(WALLS) - 1):
        lo, hi = WALLS[pos], WALLS[pos + 1]
        if _cross(ray, (lo[1], lo[2])) > 0 > _cross(ray, (hi[1], hi[2])):
            item, locus, interval = _OPEN[pos]
            return ChamberReport(
                f"item{item}", interval, MODEL_LABELS[item], locus, False, (lo[0], hi[0])
            )
    raise AssertionError(f"unclassified ray {ray}")  # pragma: no cover
