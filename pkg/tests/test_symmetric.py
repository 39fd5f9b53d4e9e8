from fractions import Fraction

import pytest

from m0n.core import DivisorClass, pair_fcurve
from m0n.expr import parse_divisor
from m0n.symmetric import (
    CurveClass,
    NotSymmetricError,
    SymmetricDivisor,
    WALLS,
    as_symmetric,
    canonical_and_psi,
    chamber_lookup,
    expand_symmetric,
    fcurve_types,
    intersection_table,
    nef_check,
    pair_curve,
)

B2 = SymmetricDivisor.basis(7, 2)
B3 = SymmetricDivisor.basis(7, 3)
K, PSI = canonical_and_psi(7)


def sym(b2, b3):
    return SymmetricDivisor(7, (b2, b3))


def test_canonical_and_psi_n7():
    assert K == sym(Fraction(-1, 3), Fraction(0))
    assert PSI == sym(Fraction(5, 3), 2)


@pytest.mark.parametrize("n,k,psi", [
    (5, (Fraction(-1, 2),), (Fraction(3, 2),)),
    (6, (Fraction(-2, 5), Fraction(-1, 5)), (Fraction(8, 5), Fraction(9, 5))),
])
def test_canonical_and_psi_small(n, k, psi):
    kk, pp = canonical_and_psi(n)
    assert kk.coeffs == k and pp.coeffs == psi


@pytest.mark.parametrize("n", [5, 6, 7, 8, 9])
def test_psi_equals_k_plus_2b(n):
    k, psi = canonical_and_psi(n)
    b = SymmetricDivisor(n, [1] * (n // 2 - 1))
    assert psi == k + b * 2


def test_basis_folds_large_index():
    assert SymmetricDivisor.basis(7, 5) == B2
    assert SymmetricDivisor.basis(7, 4) == B3
    with pytest.raises(ValueError):
        SymmetricDivisor.basis(7, 1)


def test_table_values():
    assert intersection_table(7) == [
        [3, -1, 3, -1],
        [2, 0, 0, 1],
        [1, 1, -3, 3],
        [4, 0, 0, 2],
        [5, 1, -3, 5],
        [10, -2, 6, 0],
        [3, 1, -3, 4],
    ]


def test_table_only_for_n7():
    with pytest.raises(ValueError):
        intersection_table(6)


def test_symmetric_fcurve_pairing_is_type_invariant():
    # any representative of a type gives the same number
    from m0n.core import set_partitions_4

    d = expand_symmetric(sym(2, 5))
    seen = {}
    for f in set_partitions_4(7):
        seen.setdefault(f.sizes, set()).add(pair_fcurve(f, d))
    assert all(len(v) == 1 for v in seen.values())


def test_fcurve_types():
    assert [str(c) for c in fcurve_types(7)] == ["F1,1,1,4", "F1,1,2,3", "F1,2,2,2"]
    assert len(list(fcurve_types(8))) == 5


def test_curve_validation():
    with pytest.raises(ValueError):
        CurveClass.sweeping(7, 7)
    with pytest.raises(ValueError):
        CurveClass.curve_a(8)
    with pytest.raises(ValueError):
        CurveClass("bogus", 7)
    with pytest.raises(ValueError):
        CurveClass.sweeping(7, 4).representative()


def test_pair_curve_rejects_raw_class():
    with pytest.raises(TypeError):
        pair_curve(CurveClass.sweeping(7, 4), DivisorClass.b(7, [1, 2]))


def test_as_symmetric_roundtrip():
    s = sym(Fraction(2, 3), 5)
    assert as_symmetric(expand_symmetric(s)) == s


def test_as_symmetric_via_relations():
    # psi is expanded into boundary coordinates on parse
    assert as_symmetric(parse_divisor("psi", 7)) == PSI
    assert as_symmetric(parse_divisor("B{1,2}+B{1,3}+B{1,4}+B{1,5}+B{1,6}+B{1,7}"
                                      "+B{2,3}+B{2,4}+B{2,5}+B{2,6}+B{2,7}+B{3,4}+B{3,5}+B{3,6}"
                                      "+B{3,7}+B{4,5}+B{4,6}+B{4,7}+B{5,6}+B{5,7}+B{6,7}", 7)) == B2


def test_as_symmetric_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        as_symmetric(DivisorClass.b(7, [1, 2]))
    with pytest.raises(NotSymmetricError):
        as_symmetric(DivisorClass.psi_i(7, 1))


def test_as_symmetric_accepts_all_psi_i():
    d = DivisorClass(7, psi={i: 1 for i in range(1, 8)})
    assert as_symmetric(d) == PSI


@pytest.mark.parametrize("b2,b3,expected", [
    (1, 1, True), (1, 3, True), (1, 2, True), (2, 1, False), (1, 4, False), (0, 1, False),
])
def test_nef(b2, b3, expected):
    assert nef_check(sym(b2, b3)) is expected


def test_walls_in_order():
    from m0n.symmetric import _cross

    rays = [(a, b) for _, a, b in WALLS]
    for r, s in zip(rays, rays[1:]):
        assert _cross(r, s) < 0  # strictly clockwise from B3 to B2


@pytest.mark.parametrize("name,a,b", WALLS)
def test_wall_names_match_geometry(name, a, b):
    table = {
        "B3": B3, "B2": B2, "K+psi/3": K + PSI * Fraction(1, 3),
        "psi-K": PSI - K, "psi-3K": PSI - K * 3, "psi-5K": PSI - K * 5,
    }
    s = table[name]
    assert s[2] * b == s[3] * a


@pytest.mark.parametrize("div,item,locus", [
    (K + PSI * Fraction(1, 3) + B3, "item2", "B3"),
    (PSI, "item1", "empty"),
    (PSI * 2 - K * 4, "item4", "B2^3"),
    (PSI - K * 4, "item6", "B2^2"),
    (B2 + PSI - K * 5, "item7", "B2"),
    (K + PSI * Fraction(1, 3), "item2", "empty"),
    (PSI - K, "item3", "empty"),
    (PSI - K * 3, "item5", "B2^3"),
    (PSI - K * 5, "item7", "B2^2"),
    (B2, "item8", "B2"),
    (B3, "item8", "B3"),
])
def test_chamber_lookup(div, item, locus):
    rep = chamber_lookup(div)
    assert rep.chamber_id == item
    assert rep.stable_base_locus == locus


def test_chamber_scale_invariant():
    for s in (PSI - K * 4, B3 + K):
        assert chamber_lookup(s) == chamber_lookup(s * 7)


def test_chamber_outside_and_zero():
    assert chamber_lookup(K).chamber_id == "outside_effective"
    with pytest.raises(ValueError):
        chamber_lookup(sym(0, 0))
    with pytest.raises(ValueError):
        chamber_lookup(SymmetricDivisor(6, (1, 1)))


def test_chamber_json():
    js = chamber_lookup(PSI - K * 3).to_json()
    assert js["on_wall"] is True
    assert js["wall_names"] == ["psi-3K"]
    assert js["model_label"] == "small contraction of M̄₀,₇³"
