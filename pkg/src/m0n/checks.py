"""Self-contained verification suite for the M_{0,7} reference computations.

Golden values are embedded below. Each check returns a :class:`CheckResult`;
:func:`run_checks` merges them in check-id order so output is deterministic.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from m0n.certsearch import (
    BuiltinCertificate,
    Certificate,
    base_locus_report,
    builtin_certificates,
    find_certificate,
    verify_certificate,
)
from m0n.core import (
    DivisorClass,
    boundary_indices,
    class_equal,
    keel_relations,
    pair_fcurve,
    picard_dimension,
    set_partitions_4,
)
from m0n.expr import parse_divisor
from m0n.graphs import (
    WeightData,
    component_sigmas,
    enumerate_strata,
    hassett_reduce,
    parse_tree,
    sigma_is_well_defined,
    stable_trees,
    strata_count,
    veronese_reduce,
)
from m0n.linalg import rank
from m0n.symmetric import (
    CURVE_A_PAIRINGS,
    SymmetricDivisor,
    TABLE_COLUMNS,
    TABLE_ROWS,
    as_symmetric,
    canonical_and_psi,
    chamber_lookup,
    intersection_table,
    nef_check,
)

# rows in TABLE_ROWS order, columns psi, K, B2, B3
TABLE_1 = (
    (3, -1, 3, -1),
    (2, 0, 0, 1),
    (1, 1, -3, 3),
    (4, 0, 0, 2),
    (5, 1, -3, 5),
    (10, -2, 6, 0),
    (3, 1, -3, 4),
)

RELATIONS_N7 = (
    ("K", "-1/3*B2"),
    ("psi", "5/3*B2 + 2*B3"),
    ("B2", "-3*K"),
    ("B3", "5/2*K + 1/2*psi"),
)

DIMENSIONS = {4: 1, 5: 5, 6: 16, 7: 42}

# (probe, expected model label, expected stable base locus)
CHAMBER_PROBES = (
    ("K + 1/3*psi + B3", "M̄₀,A", "B3"),
    ("psi", "M̄₀,₇", "empty"),
    ("2*psi - 4*K", "M̄₀,₇³", "B2^3"),
    ("psi - 4*K", "M̄₀,₇²", "B2^2"),
    ("B2 + psi - 5*K", "M̄₀,₇¹", "B2"),
    ("K + 1/3*psi", "M̄₀,A", "empty"),
    ("psi - K", "V_A^3", "empty"),
    ("psi - 3*K", "small contraction of M̄₀,₇³", "B2^3"),
    ("psi - 5*K", "M̄₀,₇¹", "B2^2"),
    ("B2", "point", "B2"),
    ("B3", "point", "B3"),
)

TWO_COMPONENT = "tree{ v1: [1,2,3]; v2: [4,5,6,7]; edges: (v1,v2) }"
CHAIN = "tree{ c1: [1,2]; c2: [3]; c3: [4,5,6,7]; edges: (c1,c2), (c2,c3) }"
COMB = "tree{ t1: [1,2]; t2: [3,4]; t3: [5,6]; s: [7]; edges: (t1,s), (t2,s), (t3,s) }"


@dataclass
class CheckResult:
    check_id: str
    ok: bool
    summary: str
    failures: list[str] = field(default_factory=list)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.check_id}: {self.summary}"

    def to_json(self) -> dict:
        return {"id": self.check_id, "ok": self.ok, "summary": self.summary, "failures": self.failures}


def _result(check_id: str, failures: list[str], summary: str) -> CheckResult:
    return CheckResult(check_id, not failures, summary, failures)


def check_table() -> CheckResult:
    got = intersection_table(7)
    failures = []
    for r, row in enumerate(TABLE_ROWS):
        for c, col in enumerate(TABLE_COLUMNS):
            if got[r][c] != TABLE_1[r][c]:
                failures.append(f"{row}.{col}: got {got[r][c]}, expected {TABLE_1[r][c]}")
    if dict(CURVE_A_PAIRINGS) != {2: -3, 3: 4}:
        failures.append("stored A pairings changed")
    return _result("01-table", failures, "24 computed entries and the A row match")


def check_relations() -> CheckResult:
    failures = []
    curves = list(set_partitions_4(7))
    for lhs, rhs in RELATIONS_N7:
        a, b = parse_divisor(lhs, 7), parse_divisor(rhs, 7)
        if not class_equal(a, b):
            failures.append(f"{lhs} = {rhs}: normal forms differ")
        bad = next((f for f in curves if pair_fcurve(f, a) != pair_fcurve(f, b)), None)
        if bad is not None:
            failures.append(f"{lhs} = {rhs}: pairing differs on {bad}")
    return _result("02-relations", failures, "4 identities hold by normal form and all 350 F-curves")


def check_dimensions() -> CheckResult:
    failures = []
    for n, expected in DIMENSIONS.items():
        q = keel_relations(n).quotient_dimension
        if q != expected or picard_dimension(n) != expected:
            failures.append(f"n={n}: quotient dimension {q}, expected {expected}")
        if n >= 5:
            cols = {b: i for i, b in enumerate(boundary_indices(n))}
            rows = []
            for f in set_partitions_4(n):
                rows.append({cols[b]: Fraction(pair_fcurve(f, DivisorClass(n, {b: 1}))) for b in cols
                             if pair_fcurve(f, DivisorClass(n, {b: 1}))})
            r = rank(rows, len(cols))
            if r != expected:
                failures.append(f"n={n}: F-curve pairing rank {r}, expected {expected}")
    return _result("03-dimensions", failures, "quotient dimensions 1, 5, 16, 42 and matching pairing ranks")


def check_builtin(builtins: Sequence[BuiltinCertificate] | None = None) -> CheckResult:
    failures = []
    entries = builtin_certificates() if builtins is None else builtins
    for k, entry in enumerate(entries, start=1):
        rep = verify_certificate(entry.problem, entry.certificate)
        if rep.verdict:
            continue
        why = []
        if not rep.nonnegative:
            why.append("negative coefficient")
        if not rep.support_ok:
            why.append("forbidden class in support")
        if not rep.class_matches:
            if rep.failing_fcurves:
                c, x, y = rep.failing_fcurves[0]
                why.append(f"class mismatch, witness {c}: {x} != {y}")
            else:
                why.append("class mismatch in normal form")
        failures.append(f"builtin {k} {entry.label}: " + "; ".join(why))
    return _result("04-builtin-certificates", failures, f"{len(entries)} builtin certificates verify")


def check_rediscovery(builtins: Sequence[BuiltinCertificate] | None = None) -> CheckResult:
    failures = []
    entries = builtin_certificates() if builtins is None else builtins
    for k, entry in enumerate(entries, start=1):
        cert = find_certificate(entry.problem)
        if not cert:
            failures.append(f"builtin {k}: {cert.reason}")
        elif not verify_certificate(entry.problem, cert).verdict:
            failures.append(f"builtin {k}: rediscovered certificate fails verification")
    return _result("05-rediscovery", failures, "exact LP finds a verified certificate for each problem")


def check_chambers() -> CheckResult:
    failures = []
    for text, label, locus in CHAMBER_PROBES:
        rep = chamber_lookup(as_symmetric(parse_divisor(text, 7)))
        if (rep.model_label, rep.stable_base_locus) != (label, locus):
            failures.append(f"{text}: got {rep.model_label}/{rep.stable_base_locus}, expected {label}/{locus}")
    return _result("06-chambers", failures, f"{len(CHAMBER_PROBES)} probes land in the expected chamber")


def nef_grid() -> list[tuple[int, int]]:
    return [(x, y) for x in range(1, 11) for y in range(1, 11)]


def check_nef() -> CheckResult:
    failures = []
    for x, y in nef_grid():
        expected = x <= y <= 3 * x  # between rays (1,1) and (1,3)
        if nef_check(SymmetricDivisor(7, (x, y))) != expected:
            failures.append(f"({x},{y}): nef_check disagrees with the cone")
    k, psi = canonical_and_psi(7)
    if not (nef_check(psi - k) and nef_check(k + psi * Fraction(1, 3))):
        failures.append("a generator of the nef cone is not nef")
    return _result("07-nef-grid", failures, "100 grid points agree with cone(psi-K, K+psi/3)")


def check_strata() -> CheckResult:
    failures = []
    if len(enumerate_strata(7, 3)) != 105:
        failures.append("(7,3) is not 105")
    if enumerate_strata(7, 4):
        failures.append("(7,4) is not empty")
    for n in range(4, 11):
        for i in range(1, n // 2 + 1):
            got = len(enumerate_strata(n, i))
            if got != strata_count(n, i):
                failures.append(f"({n},{i}): enumerated {got}, formula {strata_count(n, i)}")
    return _result("08-strata", failures, "105 triple strata, none of depth 4, closed form to n=10")


def check_reductions() -> CheckResult:
    failures = []
    third = WeightData.uniform(Fraction(1, 3), 7)
    rep = hassett_reduce(parse_tree(TWO_COMPONENT), third)
    mults = sorted(l.multiplicity for l in rep.result.leg_list)
    if len(rep.result.vertices) != 1 or mults != [1, 1, 1, 1, 3]:
        failures.append(f"hassett: got {rep.result.to_text()}")
    ver = WeightData.uniform(Fraction(4, 7), 7, 0, 3)
    rep = veronese_reduce(parse_tree(CHAIN), ver)
    if [sorted(vs) for vs, _ in rep.contracted] != [["c2"]]:
        failures.append(f"chain: contracted {[sorted(vs) for vs, _ in rep.contracted]}")
    rep = veronese_reduce(parse_tree(COMB), ver)
    if rep.sigma_values != {"t1": 1, "t2": 1, "t3": 1, "s": 0}:
        failures.append(f"comb: sigma {rep.sigma_values}")
    if len(rep.contracted) != 1 or "spine with 3 attachments" not in rep.contracted[0][1]:
        failures.append(f"comb: contracted {rep.contracted}")
    return _result("09-reductions", failures, "Hassett collision and both Veronese configurations")


def reduction_weights() -> list[WeightData]:
    """Weight data for the Hassett property corpus."""
    third, half = Fraction(1, 3), Fraction(1, 2)
    return [
        WeightData.uniform(third, 7),
        WeightData.uniform(half, 7),
        WeightData((1, 1, third, third, third, half, half)),
        WeightData((half, third, 1, third, half, third, 1)),
    ]


def check_properties() -> CheckResult:
    failures = []
    basis = keel_relations(7)
    curves = list(set_partitions_4(7))
    for rel in basis.relations:
        bad = next((f for f in curves if pair_fcurve(f, rel)), None)
        if bad is not None:
            failures.append(f"relation pairs nonzero with {bad}")
            break
    trees = list(stable_trees(7, 6))
    for w in reduction_weights():
        for t in trees:
            first = hassett_reduce(t, w)
            if hassett_reduce(first.result, w).contracted:
                failures.append(f"hassett not idempotent on {t.to_text()}")
            last = hassett_reduce(t, w, choose=lambda c: len(c) - 1)
            if last.result != first.result:
                failures.append(f"hassett order-dependent on {t.to_text()}")
    ver = WeightData.uniform(Fraction(4, 7), 7, 0, 3)
    for t in trees:
        if not sigma_is_well_defined(t, ver):
            failures.append(f"sigma depends on the root for {t.to_text()}")
        rep = veronese_reduce(t, ver)
        if veronese_reduce(rep.result, ver).contracted:
            failures.append(f"veronese not idempotent on {t.to_text()}")
        if sum(component_sigmas(rep.result, ver).values()) != ver.d:
            failures.append(f"degree not conserved on {t.to_text()}")
        if rep.result.n != 7:
            failures.append(f"marks lost on {t.to_text()}")
    return _result(
        "10-properties", failures,
        f"relations vs 350 F-curves; {len(trees)} trees: idempotence, order, sigma, degree",
    )


def check_base_locus() -> CheckResult:
    failures = []
    for r in base_locus_report(7):
        if not r.ok:
            failures.append(f"range {r.item} {r.interval}: witness failed")
    return _result("11-base-locus", failures, "five stable base locus ranges have witnesses")


def check_equivariance(seed: int = 0, samples: int = 20) -> CheckResult:
    """Builtin certificates transported by random permutations still verify."""
    rng = random.Random(seed)
    failures = []
    for entry in builtin_certificates():
        for _ in range(samples):
            images = list(range(1, 8))
            rng.shuffle(images)
            perm = dict(zip(range(1, 8), images))
            if not verify_certificate(entry.problem.permuted(perm), entry.certificate.permuted(perm)).verdict:
                failures.append(f"{entry.label} fails under {images}")
    return _result("12-equivariance", failures, f"builtins verify under {samples} seeded permutations each")


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "01-table": check_table,
    "02-relations": check_relations,
    "03-dimensions": check_dimensions,
    "04-builtin-certificates": check_builtin,
    "05-rediscovery": check_rediscovery,
    "06-chambers": check_chambers,
    "07-nef-grid": check_nef,
    "08-strata": check_strata,
    "09-reductions": check_reductions,
    "10-properties": check_properties,
    "11-base-locus": check_base_locus,
    "12-equivariance": check_equivariance,
}
_TAKES_BUILTINS = {"04-builtin-certificates", "05-rediscovery"}


def run_checks(
    only: Sequence[str] | None = None,
    builtins: Sequence[BuiltinCertificate] | None = None,
    jobs: int = 1,
    seed: int = 0,
) -> list[CheckResult]:
    """Run the named checks (all by default); ``builtins`` overrides the embedded certificates."""
    ids = sorted(CHECKS) if only is None else sorted(only)
    for cid in ids:
        if cid not in CHECKS:
            raise KeyError(f"unknown check {cid}")

    def run(cid: str) -> CheckResult:
        fn = CHECKS[cid]
        try:
            if cid in _TAKES_BUILTINS:
                return fn(builtins)
            return fn(seed) if cid == "12-equivariance" else fn()
        except Exception as exc:  # a crashing check is a failing check
            return CheckResult(cid, False, "raised", [f"{type(exc).__name__}: {exc}"])

    # warm shared caches before fanning out
    keel_relations(7)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, ids))
    else:
        results = [run(cid) for cid in ids]
    return sorted(results, key=lambda r: r.check_id)


def corrupt(entry: BuiltinCertificate, delta: int = 1) -> BuiltinCertificate:
    """Copy of a built-in with its first coefficient bumped, for fault-injection tests."""
    coeffs = dict(entry.certificate.coeffs)
    first = next(iter(coeffs))
    coeffs[first] += delta
    return BuiltinCertificate(entry.label, entry.problem, Certificate(coeffs, entry.certificate.multiple))


__all__ = [
    "CHECKS",
    "CheckResult",
    "corrupt",
    "run_checks",
]
