import random
from fractions import Fraction

import pytest

from m0n.certsearch import (
    Certificate,
    CertificateProblem,
    Infeasible,
    ORBIT_REPRESENTATIVES,
    _orbit_maps,
    base_locus_report,
    builtin_certificates,
    find_certificate,
    intersecting,
    permute_divisor,
    symmetric_target,
    verify_certificate,
)
from m0n.core import DimensionMismatchError, DivisorClass, boundary_indices, canonical_boundary, class_equal
from m0n.expr import parse_divisor
from m0n.symmetric import SymmetricDivisor, canonical_and_psi, chamber_lookup, expand_symmetric


def bset(*names):
    return frozenset(canonical_boundary(7, [int(ch) for ch in name]) for name in names)


BUILTINS = builtin_certificates()


@pytest.mark.parametrize("k", range(3))
def test_builtin_verifies(k):
    entry = BUILTINS[k]
    rep = verify_certificate(entry.problem, entry.certificate)
    assert rep.verdict
    assert rep.normal_form_matches and rep.pairings_match
    assert entry.certificate.multiple == 1
    assert all(c.denominator == 1 and c > 0 for c in entry.certificate.coeffs.values())


def test_builtin_term_counts():
    assert [len(e.certificate.coeffs) for e in BUILTINS] == [35, 35, 29]


def test_builtin_targets():
    k, psi = canonical_and_psi(7)
    assert class_equal(BUILTINS[0].problem.target, expand_symmetric((psi - k * 5) * Fraction(3, 2)))
    assert class_equal(BUILTINS[2].problem.target, expand_symmetric((psi - k * 3) * Fraction(3, 2)))


@pytest.mark.parametrize("k", range(3))
def test_corrupted_builtin_fails_with_witness(k):
    entry = BUILTINS[k]
    coeffs = dict(entry.certificate.coeffs)
    b = next(iter(coeffs))
    coeffs[b] += 1
    rep = verify_certificate(entry.problem, Certificate(coeffs))
    assert not rep.verdict and not rep.class_matches
    assert rep.failing_fcurves
    curve, got, want = rep.failing_fcurves[0]
    assert got != want


def test_forbidden_support_detected():
    entry = BUILTINS[0]
    coeffs = dict(entry.certificate.coeffs)
    coeffs[canonical_boundary(7, [1, 2])] = Fraction(0)
    assert verify_certificate(entry.problem, Certificate(coeffs)).verdict
    bad = dict(coeffs)
    bad[canonical_boundary(7, [1, 2])] = Fraction(1)
    rep = verify_certificate(entry.problem, Certificate(bad))
    assert not rep.support_ok


def test_negative_coefficient_detected():
    target = DivisorClass.b(7, [1, 3])
    problem = CertificateProblem(7, target, frozenset())
    cert = Certificate({canonical_boundary(7, [1, 3]): 2, canonical_boundary(7, [1, 4]): -1})
    rep = verify_certificate(problem, cert)
    assert not rep.nonnegative


@pytest.mark.parametrize("k", range(3))
def test_rediscovery(k):
    entry = BUILTINS[k]
    cert = find_certificate(entry.problem)
    assert isinstance(cert, Certificate)
    assert verify_certificate(entry.problem, cert).verdict


def test_certificate_json_roundtrip():
    cert = BUILTINS[1].certificate
    assert Certificate.from_json(cert.to_json(), 7) == cert


def test_problem_validation():
    with pytest.raises(ValueError):
        CertificateProblem(7, DivisorClass.psi_i(7, 1), frozenset())
    with pytest.raises(DimensionMismatchError):
        CertificateProblem(6, symmetric_target(1, 1), frozenset())
    with pytest.raises(ValueError):
        CertificateProblem(7, symmetric_target(1, 1), frozenset(), m_max=0)


def test_rigidity_regressions():
    # B2 and B3 are rigid: no other effective boundary representative
    b2 = symmetric_target(1, 0)
    assert not find_certificate(CertificateProblem(7, b2, bset("12")))
    assert not find_certificate(CertificateProblem(7, symmetric_target(0, 1), bset("123")))
    found = find_certificate(CertificateProblem(7, b2, frozenset()))
    assert isinstance(found, Certificate) and found.multiple == 1


def test_infeasible_is_falsy_with_reason():
    res = find_certificate(CertificateProblem(7, symmetric_target(1, 0), bset("12")))
    assert isinstance(res, Infeasible)
    assert not res and res.reason


def test_multiple_limits():
    target = DivisorClass.b(7, [1, 2], Fraction(1, 7))
    res = find_certificate(CertificateProblem(7, target, frozenset(), m_max=6))
    assert isinstance(res, Infeasible)
    res = find_certificate(CertificateProblem(7, target, frozenset(), allow_multiple=False))
    assert isinstance(res, Infeasible)
    res = find_certificate(CertificateProblem(7, target, frozenset(), m_max=7))
    assert isinstance(res, Certificate) and res.multiple == 7
    res = find_certificate(CertificateProblem(7, target, frozenset(), require_integral=False))
    assert isinstance(res, Certificate) and res.multiple == 1


def test_everything_forbidden():
    res = find_certificate(CertificateProblem(7, symmetric_target(1, 1), frozenset(boundary_indices(7))))
    assert isinstance(res, Infeasible)


# feasibility of avoiding a stratum, by chamber; a "+" means a certificate exists
FORBIDDEN_SETS = [("12",), ("123",), ("12", "34"), ("12", "345"), ("12", "123"), ("12", "34", "56")]
DUAL_PATTERN = {
    "B3": ([(1, 4), (1, 10), (2, 7)], "+-+--+"),
    "empty": ([(1, 2), (2, 3), (2, 5)], "++++++"),
    "B2^3": ([(6, 5), (7, 6), (11, 9)], "+++++-"),
    "B2^2": ([(9, 6), (14, 9), (19, 12)], "++-++-"),
    "B2": ([(2, 1), (3, 1), (7, 4)], "-+----"),
}


@pytest.mark.parametrize("locus", sorted(DUAL_PATTERN))
def test_dual_consistency(locus):
    probes, pattern = DUAL_PATTERN[locus]
    for b2, b3 in probes:
        assert chamber_lookup(SymmetricDivisor(7, (b2, b3))).stable_base_locus == locus
        got = ""
        for names in FORBIDDEN_SETS:
            problem = CertificateProblem(7, symmetric_target(b2, b3), bset(*names), require_integral=False)
            got += "+" if find_certificate(problem) else "-"
        assert got == pattern


def test_dual_pattern_rule():
    # a certificate exists iff the forbidden stratum is not inside the base locus
    def inside(locus, names):
        n2 = sum(len(x) == 2 for x in names)
        has3 = any(len(x) == 3 for x in names)
        return {
            "empty": False,
            "B3": has3,
            "B2^3": n2 >= 3,
            "B2^2": n2 >= 2,
            "B2": n2 >= 1,
        }[locus]

    for locus, (_, pattern) in DUAL_PATTERN.items():
        expected = "".join("-" if inside(locus, names) else "+" for names in FORBIDDEN_SETS)
        assert expected == pattern


def test_intersecting():
    assert intersecting(*bset("12", "34"))
    assert intersecting(*bset("12", "345"))
    assert intersecting(*bset("12", "123"))
    assert not intersecting(*bset("12", "13"))
    assert not intersecting(*bset("123", "145"))
    assert intersecting(*bset("123", "456"))


@pytest.mark.parametrize("kind,size", [("B2", 21), ("B3", 35), ("B2-B2", 105),
                                       ("B2-B3 disjoint", 210), ("B2-B3 nested", 105)])
def test_orbit_sizes(kind, size):
    reps = sorted(bset(*ORBIT_REPRESENTATIVES[kind]))
    assert len(_orbit_maps(reps)) == size


def test_intersecting_pairs_covered_by_orbits():
    # every intersecting B2/B3 pair lies in one of the two representative orbits
    orbits = set()
    for kind in ("B2-B3 disjoint", "B2-B3 nested"):
        reps = sorted(bset(*ORBIT_REPRESENTATIVES[kind]))
        orbits |= {key for key, _ in _orbit_maps(reps)}
    idx = boundary_indices(7)
    pairs = {frozenset((a, b)) for a in idx for b in idx
             if a.size == 2 and b.size == 3 and intersecting(a, b)}
    assert pairs == orbits


@pytest.mark.parametrize("seed", range(20))
def test_equivariance(seed):
    rng = random.Random(seed)
    images = list(range(1, 8))
    rng.shuffle(images)
    perm = dict(zip(range(1, 8), images))
    for entry in BUILTINS:
        rep = verify_certificate(entry.problem.permuted(perm), entry.certificate.permuted(perm))
        assert rep.verdict
    d = parse_divisor("3*B{1,2} - B{1,2,3}", 7)
    assert class_equal(permute_divisor(d, perm), parse_divisor(
        f"3*B{{{perm[1]},{perm[2]}}} - B{{{perm[1]},{perm[2]},{perm[3]}}}", 7))


def test_base_locus_report():
    ranges = base_locus_report(7)
    assert [r.locus for r in ranges] == ["empty", "B3", "B2^3", "B2^2", "B2"]
    assert all(r.ok for r in ranges)
    sizes = [w.orbit_size for r in ranges for w in r.exclusion]
    assert sizes == [21, 105, 210, 105, 35]
    js = ranges[3].to_json()
    assert js["ok"] and len(js["exclusion_witnesses"]) == 2


def test_base_locus_report_exhaustive():
    assert all(r.ok for r in base_locus_report(7, exhaustive=True))


def test_base_locus_report_n_guard():
    with pytest.raises(ValueError):
        base_locus_report(6)
