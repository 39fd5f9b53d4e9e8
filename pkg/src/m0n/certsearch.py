"""Effective boundary expressions with prescribed vanishing, found and checked exactly."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from m0n.core import (
    BoundaryIndex,
    DimensionMismatchError,
    DivisorClass,
    FCurve,
    boundary_indices,
    canonical_boundary,
    keel_relations,
    normal_form,
    pair_fcurve,
    set_partitions_4,
)
from m0n.simplex import find_feasible_point
from m0n.symmetric import (
    CurveClass,
    SymmetricDivisor,
    canonical_and_psi,
    chamber_lookup,
    expand_symmetric,
    nef_check,
    pair_curve,
)

DEFAULT_M_MAX = 60


@dataclass(frozen=True)
class CertificateProblem:
    n: int
    target: DivisorClass
    forbidden: frozenset[BoundaryIndex]
    require_integral: bool = True
    allow_multiple: bool = True
    m_max: int = DEFAULT_M_MAX

    def __post_init__(self) -> None:
        if self.target.n != self.n:
            raise DimensionMismatchError(f"target has n={self.target.n}, problem has n={self.n}")
        if self.target.psi:
            raise ValueError("certificate targets must be boundary-supported")
        forbidden = frozenset(self.forbidden)
        for b in forbidden:
            if b.n != self.n:
                raise DimensionMismatchError(f"forbidden index {b} is not on M_0,{self.n}")
        object.__setattr__(self, "forbidden", forbidden)
        if self.m_max < 1:
            raise ValueError("m_max must be at least 1")

    def permuted(self, perm: Mapping[int, int]) -> "CertificateProblem":
        return CertificateProblem(
            self.n,
            permute_divisor(self.target, perm),
            frozenset(permute_boundary(b, perm) for b in self.forbidden),
            self.require_integral,
            self.allow_multiple,
            self.m_max,
        )


@dataclass(frozen=True)
class Certificate:
    coeffs: Mapping[BoundaryIndex, Fraction]
    multiple: int = 1

    def __post_init__(self) -> None:
        clean = {b: Fraction(c) for b, c in sorted(self.coeffs.items()) if c != 0}
        object.__setattr__(self, "coeffs", clean)
        if self.multiple < 1:
            raise ValueError("multiple must be a positive integer")

    def divisor(self, n: int) -> DivisorClass:
        return DivisorClass(n, self.coeffs)

    def permuted(self, perm: Mapping[int, int]) -> "Certificate":
        return Certificate({permute_boundary(b, perm): c for b, c in self.coeffs.items()}, self.multiple)

    def to_json(self) -> dict:
        return {"multiple": self.multiple, "coeffs": {str(b): str(c) for b, c in self.coeffs.items()}}

    @classmethod
    def from_json(cls, data: Mapping, n: int) -> "Certificate":
        from m0n.expr import parse_boundary_list

        coeffs = {}
        for key, val in data["coeffs"].items():
            (b,) = parse_boundary_list(key, n)
            coeffs[b] = coeffs.get(b, 0) + Fraction(str(val))
        return cls(coeffs, int(data.get("multiple", 1)))


@dataclass(frozen=True)
class VerifyReport:
    class_matches: bool
    nonnegative: bool
    support_ok: bool
    failing_fcurves: tuple[tuple[str, Fraction, Fraction], ...] = ()
    normal_form_matches: bool = True
    pairings_match: bool = True

    @property
    def verdict(self) -> bool:
        return self.class_matches and self.nonnegative and self.support_ok

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "class_matches": self.class_matches,
            "nonnegative": self.nonnegative,
            "support_ok": self.support_ok,
            "normal_form_matches": self.normal_form_matches,
            "pairings_match": self.pairings_match,
            "failing_fcurves": [
                {"curve": c, "certificate": str(x), "target": str(y)} for c, x, y in self.failing_fcurves
            ],
        }


def permute_boundary(b: BoundaryIndex, perm: Mapping[int, int]) -> BoundaryIndex:
    return canonical_boundary(b.n, (perm[x] for x in b.elements))


def permute_divisor(d: DivisorClass, perm: Mapping[int, int]) -> DivisorClass:
    return DivisorClass(
        d.n,
        {permute_boundary(b, perm): c for b, c in d.boundary.items()},
        {perm[i]: c for i, c in d.psi.items()},
    )


_fcurve_cache: dict[int, tuple[FCurve, ...]] = {}


def all_fcurves(n: int) -> tuple[FCurve, ...]:
    if n not in _fcurve_cache:
        _fcurve_cache[n] = tuple(set_partitions_4(n))
    return _fcurve_cache[n]


def verify_certificate(problem: CertificateProblem, cert: Certificate) -> VerifyReport:
    """Check a certificate; class equality is tested by normal form and by all F-curves."""
    n = problem.n
    for b in cert.coeffs:
        if b.n != n:
            raise DimensionMismatchError(f"certificate index {b} is not on M_0,{n}")
    expr = cert.divisor(n)
    goal = problem.target * cert.multiple
    nf_ok = normal_form(expr - goal).is_zero()
    failing = []
    for f in all_fcurves(n):
        lhs, rhs = pair_fcurve(f, expr), pair_fcurve(f, goal)
        if lhs != rhs:
            failing.append((str(f), lhs, rhs))
    pair_ok = not failing
    return VerifyReport(
        class_matches=nf_ok and pair_ok,
        nonnegative=all(c >= 0 for c in cert.coeffs.values()),
        support_ok=not (set(cert.coeffs) & problem.forbidden),
        failing_fcurves=tuple(failing),
        normal_form_matches=nf_ok,
        pairings_match=pair_ok,
    )


@dataclass(frozen=True)
class Infeasible:
    reason: str

    def __bool__(self) -> bool:
        return False


def find_certificate(problem: CertificateProblem) -> Certificate | Infeasible:
    """Search for a nonnegative boundary expression avoiding the forbidden classes.

    The class constraint is the normal form of sum c_I B_I - target, i.e. the
    free coordinates of the Keel echelon form. The LP is solved exactly.
    """
    n = problem.n
    basis = keel_relations(n)
    free = basis.free_columns
    allowed = [b for b in boundary_indices(n) if b not in problem.forbidden]
    columns = []
    for b in allowed:
        reduced = basis.reduce_row(DivisorClass(n, {b: 1}).to_row())
        columns.append([reduced.get(c, Fraction(0)) for c in free])
    goal = basis.reduce_row(problem.target.to_row())
    rhs = [goal.get(c, Fraction(0)) for c in free]
    matrix = [[col[r] for col in columns] for r in range(len(free))]
    if not allowed:
        return Infeasible("every boundary class is forbidden")
    x = find_feasible_point(matrix, rhs)
    if x is None:
        return Infeasible("no nonnegative boundary expression avoids the forbidden classes")
    coeffs = {b: v for b, v in zip(allowed, x) if v}
    multiple = 1
    if problem.require_integral:
        multiple = lcm(*(v.denominator for v in coeffs.values())) if coeffs else 1
        if multiple > 1 and not problem.allow_multiple:
            return Infeasible("rational solution only and multiples are not allowed")
        if multiple > problem.m_max:
            return Infeasible(f"smallest clearing multiple {multiple} exceeds m_max={problem.m_max}")
        coeffs = {b: v * multiple for b, v in coeffs.items()}
    return Certificate(coeffs, multiple)


# --------------------------------------------------------------------------
# The three expressions written out for M_{0,7}

def _terms(groups: Sequence[tuple[int, Sequence[str]]]) -> dict[BoundaryIndex, Fraction]:
    out: dict[BoundaryIndex, Fraction] = {}
    for coeff, names in groups:
        for name in names:
            b = canonical_boundary(7, [int(ch) for ch in name])
            if b in out:
                raise ValueError(f"duplicate term B{{{name}}}")
            out[b] = Fraction(coeff)
    return out


_E_DISJOINT = _terms([
    (12, ["14"]),
    (9, ["25", "26", "56"]),
    (6, ["13", "17", "23", "27", "34", "37", "47"]),
    (3, ["15", "16", "35", "36", "45", "46", "57", "67"]),
    (15, ["256"]),
    (12, ["147", "134"]),
    (6, ["137", "145", "146", "235", "236", "237", "257", "267", "347"]),
    (3, ["156", "356", "456", "567"]),
])

_E_NESTED = _terms([
    (12, ["14"]),
    (9, ["26", "27", "67"]),
    (6, ["13", "15", "23", "25", "34", "35", "45"]),
    (3, ["16", "17", "36", "37", "46", "47", "56", "57"]),
    (15, ["267"]),
    (12, ["134", "145"]),
    (6, ["135", "146", "147", "235", "236", "237", "256", "257", "345"]),
    (3, ["167", "367", "467", "567"]),
])

_F_TWO_B2 = _terms([
    (12, ["13"]),
    (9, ["24", "26", "46"]),
    (6, ["15", "17", "35", "37"]),
    (3, ["25", "27", "45", "47", "56", "57", "67"]),
    (18, ["246"]),
    (15, ["135", "137"]),
    (6, ["157", "245", "247", "256", "267", "357", "456", "467"]),
    (3, ["123", "134", "136"]),
])


def symmetric_target(b2: int, b3: int) -> DivisorClass:
    return expand_symmetric(SymmetricDivisor(7, (b2, b3)))


def _forbid(*names: str) -> frozenset[BoundaryIndex]:
    return frozenset(canonical_boundary(7, [int(ch) for ch in name]) for name in names)


@dataclass(frozen=True)
class BuiltinCertificate:
    label: str
    problem: CertificateProblem
    certificate: Certificate


def builtin_certificates() -> list[BuiltinCertificate]:
    """E' for {1,2}/{3,4,5}, E' for {1,2}/{1,2,3}, F' for {1,2}/{3,4}."""
    e_target = symmetric_target(5, 3)
    f_target = symmetric_target(4, 3)
    return [
        BuiltinCertificate(
            "E' (I={1,2}, J={3,4,5})",
            CertificateProblem(7, e_target, _forbid("12", "345")),
            Certificate(_E_DISJOINT),
        ),
        BuiltinCertificate(
            "E' (I={1,2}, J={1,2,3})",
            CertificateProblem(7, e_target, _forbid("12", "123")),
            Certificate(_E_NESTED),
        ),
        BuiltinCertificate(
            "F' (I={1,2}, K={3,4})",
            CertificateProblem(7, f_target, _forbid("12", "34")),
            Certificate(_F_TWO_B2),
        ),
    ]


# --------------------------------------------------------------------------
# Stable base locus decomposition of the symmetric cone of M_{0,7}

def intersecting(b1: BoundaryIndex, b2: BoundaryIndex) -> bool:
    """B_I and B_J meet iff some representatives are nested or disjoint."""
    if b1 == b2:
        return False
    s, t = set(b1.elements), set(b2.elements)
    sc, tc = set(b1.complement()), set(b2.complement())
    return any(x <= y or y <= x for x, y in ((s, t), (s, tc), (sc, t), (sc, tc)))


def _orbit_maps(reps: Sequence[BoundaryIndex]) -> list[tuple[frozenset[BoundaryIndex], dict[int, int]]]:
    """Distinct S_n-images of a set of boundary indices, each with one permutation reaching it."""
    n = reps[0].n
    seen: dict[frozenset[BoundaryIndex], dict[int, int]] = {}
    for image in itertools.permutations(range(1, n + 1)):
        perm = dict(zip(range(1, n + 1), image))
        key = frozenset(permute_boundary(b, perm) for b in reps)
        if key not in seen:
            seen[key] = perm
    return sorted(seen.items(), key=lambda kv: sorted(b.sort_key() for b in kv[0]))


@dataclass
class OrbitWitness:
    kind: str
    representative: tuple[str, ...]
    certificate: Certificate | Infeasible
    representative_verified: bool
    orbit_size: int = 0
    orbit_verified: int = 0

    @property
    def ok(self) -> bool:
        return self.representative_verified and self.orbit_verified == self.orbit_size

    def to_json(self) -> dict:
        cert = self.certificate.to_json() if isinstance(self.certificate, Certificate) else None
        return {
            "kind": self.kind,
            "representative": list(self.representative),
            "certificate": cert,
            "representative_verified": self.representative_verified,
            "orbit_size": self.orbit_size,
            "orbit_verified": self.orbit_verified,
        }


@dataclass
class LocusRange:
    item: int
    interval: str
    locus: str
    probe: SymmetricDivisor
    inclusion: list[tuple[str, Fraction]] = field(default_factory=list)
    exclusion: list[OrbitWitness] = field(default_factory=list)
    checks: list[tuple[str, bool]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            all(v < 0 for _, v in self.inclusion)
            and all(w.ok for w in self.exclusion)
            and all(flag for _, flag in self.checks)
        )

    def to_json(self) -> dict:
        from m0n.expr import format_symmetric

        return {
            "item": self.item,
            "interval": self.interval,
            "stable_base_locus": self.locus,
            "probe": format_symmetric(self.probe),
            "inclusion_witnesses": [{"curve": c, "pairing": str(v)} for c, v in self.inclusion],
            "exclusion_witnesses": [w.to_json() for w in self.exclusion],
            "checks": [{"name": name, "ok": flag} for name, flag in self.checks],
            "ok": self.ok,
        }


ORBIT_REPRESENTATIVES = {
    "B2": ("12",),
    "B3": ("123",),
    "B2-B2": ("12", "34"),
    "B2-B3 disjoint": ("12", "345"),
    "B2-B3 nested": ("12", "123"),
}


def _orbit_witness(kind: str, target: DivisorClass, exhaustive: bool) -> OrbitWitness:
    names = ORBIT_REPRESENTATIVES[kind]
    reps = [canonical_boundary(7, [int(ch) for ch in name]) for name in names]
    problem = CertificateProblem(7, target, frozenset(reps))
    cert = find_certificate(problem)
    shown = tuple(str(b) for b in reps)
    if not isinstance(cert, Certificate):
        return OrbitWitness(kind, shown, cert, False)
    witness = OrbitWitness(kind, shown, cert, verify_certificate(problem, cert).verdict)
    maps = _orbit_maps(reps)
    witness.orbit_size = len(maps)
    for forbidden, perm in maps:
        moved = cert.permuted(perm)
        moved_problem = CertificateProblem(7, target, forbidden)
        if exhaustive:
            ok = verify_certificate(moved_problem, moved).verdict
        else:
            # target is symmetric, so class equality transports; check support only
            ok = not (set(moved.coeffs) & forbidden)
        witness.orbit_verified += ok
    return witness


def base_locus_report(n: int = 7, exhaustive: bool = False) -> list[LocusRange]:
    """Stable base loci of the five ranges with inclusion and exclusion witnesses.

    Inclusion witnesses are curves meeting a probe divisor negatively.
    Exclusion witnesses are certificates for orbit representatives of
    intersecting boundary pairs, transported over S_7. With ``exhaustive``
    every transported certificate is re-verified in full.
    """
    if n != 7:
        raise ValueError("the base locus report is implemented for n = 7")
    k, psi = canonical_and_psi(7)
    b2, b3 = SymmetricDivisor.basis(7, 2), SymmetricDivisor.basis(7, 3)
    nef_a, nef_b = psi - k, k + psi * Fraction(1, 3)
    f1114, f1222 = CurveClass.fcurve(1, 1, 1, 4), CurveClass.fcurve(1, 2, 2, 2)
    c5, curve_a = CurveClass.sweeping(7, 5), CurveClass.curve_a()

    def incl(curves, probe):
        return [(str(c), pair_curve(c, probe)) for c in curves]

    def as_target(s: SymmetricDivisor) -> DivisorClass:
        return expand_symmetric(s)

    r1 = LocusRange(1, "[psi-K, K+psi/3]", "empty", nef_a + nef_b)
    r1.checks.append(("psi-K is nef", nef_check(nef_a)))
    r1.checks.append(("K+psi/3 is nef", nef_check(nef_b)))

    probe = nef_b + b3
    r2 = LocusRange(2, "(K+psi/3, B3]", "B3", probe, incl([f1114], probe))
    r2.exclusion.append(_orbit_witness("B2", as_target(probe * 9), exhaustive))

    probe = (psi - k * 3) + nef_a
    r3 = LocusRange(3, "[psi-3K, psi-K)", "B2^3", probe, incl([f1222], probe))
    r3.exclusion.append(_orbit_witness("B2-B2", symmetric_target(4, 3), exhaustive))

    probe = (psi - k * 5) + (psi - k * 3)
    r4 = LocusRange(4, "[psi-5K, psi-3K)", "B2^2", probe, incl([f1222, curve_a], probe))
    r4.exclusion.append(_orbit_witness("B2-B3 disjoint", symmetric_target(5, 3), exhaustive))
    r4.exclusion.append(_orbit_witness("B2-B3 nested", symmetric_target(5, 3), exhaustive))

    probe = b2 + (psi - k * 5)
    r5 = LocusRange(5, "[B2, psi-5K)", "B2", probe, incl([f1222, curve_a, c5], probe))
    r5.exclusion.append(_orbit_witness("B3", as_target(probe * 3), exhaustive))

    out = [r1, r2, r3, r4, r5]
    for r in out:
        r.checks.append(("probe chamber agrees", chamber_lookup(r.probe).stable_base_locus == r.locus))
    return out
