"""Acceptance criteria 1-10, exact arithmetic.

Each test prints one ``PASS criterion k: ...`` or ``FAIL criterion k: ...`` line
and then asserts. The lines are repeated in the pytest terminal summary.
"""
import time
from fractions import Fraction
from math import comb

from m0n.certsearch import builtin_certificates, find_certificate, symmetric_target, verify_certificate
from m0n.core import (
    DivisorClass,
    boundary_indices,
    class_equal,
    keel_relations,
    pair_fcurve,
    set_partitions_4,
)
from m0n.expr import parse_divisor
from m0n.graphs import (
    WeightData,
    _contract_tail,
    component_sigmas,
    enumerate_strata,
    hassett_reduce,
    light_tails,
    parse_tree,
    sigma_is_well_defined,
    stable_trees,
    strata_count,
    veronese_reduce,
)
from m0n.linalg import rank
from m0n.symmetric import (
    CurveClass,
    SymmetricDivisor,
    canonical_and_psi,
    chamber_lookup,
    nef_check,
    pair_curve,
)

_LINES: list[str] = []


def report(k: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    _LINES.append(line)
    print(line)
    assert ok, line


K, PSI = canonical_and_psi(7)
B2 = SymmetricDivisor.basis(7, 2)
B3 = SymmetricDivisor.basis(7, 3)
F_CURVES = list(set_partitions_4(7))


def test_criterion_1_table():
    expected = {
        "F1,1,1,4": (3, -1, 3, -1),
        "F1,1,2,3": (2, 0, 0, 1),
        "F1,2,2,2": (1, 1, -3, 3),
        "C4": (4, 0, 0, 2),
        "C5": (5, 1, -3, 5),
        "C6": (10, -2, 6, 0),
    }
    curves = {
        "F1,1,1,4": CurveClass.fcurve(1, 1, 1, 4),
        "F1,1,2,3": CurveClass.fcurve(1, 1, 2, 3),
        "F1,2,2,2": CurveClass.fcurve(1, 2, 2, 2),
        "C4": CurveClass.sweeping(7, 4),
        "C5": CurveClass.sweeping(7, 5),
        "C6": CurveClass.sweeping(7, 6),
    }
    columns = (PSI, K, B2, B3)
    bad = [
        (name, j) for name, row in expected.items() for j, col in enumerate(columns)
        if pair_curve(curves[name], col) != row[j]
    ]
    a_row = tuple(int(pair_curve(CurveClass.curve_a(), col)) for col in columns)
    entries = sum(len(r) for r in expected.values())
    report(1, not bad and entries == 24 and a_row == (3, 1, -3, 4),
           f"{entries - len(bad)}/24 table entries match, A row {a_row}")


def test_criterion_2_identities():
    identities = [
        ("K", "-1/3*B2"),
        ("psi", "5/3*B2 + 2*B3"),
        ("B2", "-3*K"),
        ("B3", "5/2*K + 1/2*psi"),
    ]
    ok = 0
    for lhs, rhs in identities:
        a, b = parse_divisor(lhs, 7), parse_divisor(rhs, 7)
        by_nf = class_equal(a, b)
        by_pairing = all(pair_fcurve(f, a) == pair_fcurve(f, b) for f in F_CURVES)
        ok += by_nf and by_pairing
    report(2, ok == 4, f"{ok}/4 identities hold by normal form and on all {len(F_CURVES)} F-curves")


def test_criterion_3_dimensions():
    got, ranks = {}, {}
    for n in (4, 5, 6, 7):
        got[n] = keel_relations(n).quotient_dimension
        if n >= 5:
            idx = boundary_indices(n)
            rows = []
            for f in set_partitions_4(n):
                row = {}
                for i, b in enumerate(idx):
                    v = pair_fcurve(f, DivisorClass(n, {b: 1}))
                    if v:
                        row[i] = Fraction(v)
                rows.append(row)
            ranks[n] = rank(rows, len(idx))
    formula = {n: 2 ** (n - 1) - comb(n, 2) - 1 for n in got}
    ok = got == formula == {4: 1, 5: 5, 6: 16, 7: 42} and all(ranks[n] == got[n] for n in ranks)
    report(3, ok, f"quotient dimensions {got}, F-curve pairing ranks {ranks}")


def test_criterion_4_builtins():
    entries = builtin_certificates()
    targets = [symmetric_target(5, 3), symmetric_target(5, 3), symmetric_target(4, 3)]
    verdicts = []
    for entry, target in zip(entries, targets):
        rep = verify_certificate(entry.problem, entry.certificate)
        verdicts.append(rep.verdict and rep.nonnegative and rep.support_ok
                        and class_equal(entry.problem.target, target))
    report(4, len(entries) == 3 and all(verdicts), f"builtin verdicts {verdicts}")


def test_criterion_5_rediscovery():
    times, verdicts = [], []
    for entry in builtin_certificates():
        start = time.perf_counter()
        cert = find_certificate(entry.problem)
        times.append(time.perf_counter() - start)
        verdicts.append(bool(cert) and verify_certificate(entry.problem, cert).verdict)
    ok = all(verdicts) and all(t < 60 for t in times)
    report(5, ok, f"rediscovered {sum(verdicts)}/3, seconds {[round(t, 2) for t in times]}")


def test_criterion_6_chambers():
    third = Fraction(1, 3)
    probes = [
        # one per open chamber
        (K + PSI * third + B3, "M̄₀,A", "B3"),
        (PSI, "M̄₀,₇", "empty"),
        (PSI * 2 - K * 4, "M̄₀,₇³", "B2^3"),
        (PSI - K * 4, "M̄₀,₇²", "B2^2"),
        (B2 + PSI - K * 5, "M̄₀,₇¹", "B2"),
        # walls
        (K + PSI * third, "M̄₀,A", "empty"),
        (PSI - K, "V_A^3", "empty"),
        (PSI - K * 3, "small contraction of M̄₀,₇³", "B2^3"),
        (PSI - K * 5, "M̄₀,₇¹", "B2^2"),
    ]
    bad = []
    for d, label, locus in probes:
        rep = chamber_lookup(d)
        if (rep.model_label, rep.stable_base_locus) != (label, locus):
            bad.append((d.coeffs, rep.model_label, rep.stable_base_locus))
    report(6, not bad, f"{len(probes) - len(bad)}/{len(probes)} probes match; mismatches {bad}")


def test_criterion_7_nef_grid():
    lo, hi = PSI - K, K + PSI * Fraction(1, 3)
    # (x, y) is in cone(lo, hi) iff it is on the inner side of both rays
    def in_cone(x, y):
        return lo[2] * y - lo[3] * x >= 0 and hi[3] * x - hi[2] * y >= 0

    grid = [(Fraction(x), Fraction(y)) for x in range(1, 11) for y in range(1, 11)]
    bad = [(x, y) for x, y in grid if nef_check(SymmetricDivisor(7, (x, y))) != in_cone(x, y)]
    inside = sum(in_cone(x, y) for x, y in grid)
    report(7, len(grid) == 100 and not bad, f"{len(grid) - len(bad)}/100 grid points agree, {inside} nef")


def test_criterion_8_strata():
    n73, n74 = len(enumerate_strata(7, 3)), len(enumerate_strata(7, 4))
    bad = [(n, i) for n in range(4, 11) for i in range(1, n // 2 + 1)
           if len(enumerate_strata(n, i)) != strata_count(n, i)]
    report(8, n73 == 105 and n74 == 0 and not bad,
           f"(7,3)={n73}, (7,4)={n74}, closed form mismatches for n<=10: {bad}")


def test_criterion_9_reductions():
    split = hassett_reduce(parse_tree("tree{ v1: [1,2,3]; v2: [4,5,6,7]; edges: (v1,v2) }"),
                          WeightData.uniform(Fraction(1, 3), 7))
    mults = sorted(l.multiplicity for l in split.result.leg_list)
    ver = WeightData.uniform(Fraction(4, 7), 7, 0, 3)
    chain = veronese_reduce(parse_tree("tree{ c1: [1,2]; c2: [3]; c3: [4,5,6,7]; edges: (c1,c2), (c2,c3) }"), ver)
    combt = veronese_reduce(parse_tree(
        "tree{ t1: [1,2]; t2: [3,4]; t3: [5,6]; s: [7]; edges: (t1,s), (t2,s), (t3,s) }"), ver)
    ok = (
        len(split.result.vertices) == 1 and mults == [1, 1, 1, 1, 3]
        and [sorted(vs) for vs, _ in chain.contracted] == [["c2"]]
        and combt.sigma_values == {"t1": 1, "t2": 1, "t3": 1, "s": 0}
        and [sorted(vs) for vs, _ in combt.contracted] == [["s"]]
    )
    report(9, ok, f"hassett multiplicities {mults}, comb sigma {combt.sigma_values}")


def _all_outcomes(tree, w):
    cands = light_tails(tree, w)
    if not cands:
        return {tree}
    out = set()
    for tail, target in cands:
        out |= _all_outcomes(_contract_tail(tree, tail, target), w)
    return out


def test_criterion_10_properties():
    failures = []
    for rel in keel_relations(7).relations:
        if any(pair_fcurve(f, rel) for f in F_CURVES):
            failures.append("relation pairs nonzero")
            break
    trees = list(stable_trees(7, 6))
    third, half = Fraction(1, 3), Fraction(1, 2)
    hassett_weights = [
        WeightData.uniform(third, 7),
        WeightData.uniform(half, 7),
        WeightData((1, 1, third, third, third, half, half)),
        WeightData((half, third, 1, third, half, third, 1)),
    ]
    for w in hassett_weights:
        for t in trees:
            rep = hassett_reduce(t, w)
            if hassett_reduce(rep.result, w).contracted:
                failures.append(f"hassett not idempotent: {t.to_text()}")
            if _all_outcomes(t, w) != {rep.result}:
                failures.append(f"hassett order-dependent: {t.to_text()}")
    ver = WeightData.uniform(Fraction(4, 7), 7, 0, 3)
    for t in trees:
        if not sigma_is_well_defined(t, ver):
            failures.append(f"sigma root-dependent: {t.to_text()}")
        rep = veronese_reduce(t, ver)
        if veronese_reduce(rep.result, ver).contracted:
            failures.append(f"veronese not idempotent: {t.to_text()}")
        if sum(rep.sigma_values.values()) != 3 or sum(component_sigmas(rep.result, ver).values()) != 3:
            failures.append(f"degree not conserved: {t.to_text()}")
    report(10, not failures, f"{len(trees)} trees, {len(hassett_weights)} weight data, failures {failures[:3]}")


if __name__ == "__main__":
    import sys

    tests = [test_criterion_1_table, test_criterion_2_identities, test_criterion_3_dimensions,
             test_criterion_4_builtins, test_criterion_5_rediscovery, test_criterion_6_chambers,
             test_criterion_7_nef_grid, test_criterion_8_strata, test_criterion_9_reductions,
             test_criterion_10_properties]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
