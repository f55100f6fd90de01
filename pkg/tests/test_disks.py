from collections import Counter

import pytest

from chl import check_cyclicity, chl_superpotential, parse_product_table, serialize_product_table
from dimer import CCW, CW, LEFT, RIGHT, load_dimer
from disks import (
    PolygonFilter,
    deformed_complement,
    deformed_mirror_object,
    deformed_potential,
    deformed_potential_parts,
    deformed_superpotential,
    enumerate_midpoint_polygons,
    hl_odd_product,
    identity_shift_check,
    l_polygon_multiplicity,
    md_product,
    oracle_checks,
    polygon_dump,
    product_table,
    resolve_identities,
    sign_law_check,
)
from errors import DisksError
from jacobi import ideal_membership_truncated
from mirror import classical_superpotential
from ncpoly import DefSeries, NCPoly, cyclic_derivative, mul, parse_ncpoly, parse_series


def test_sphere3_faces_are_the_degree_zero_polygons(sphere3):
    polygons = enumerate_midpoint_polygons(sphere3, 0)
    assert len(polygons) == 6
    assert all(p.degree == 0 and p.segment_lengths == (1, 1, 1) for p in polygons)
    cw_words = sorted(p.arcs for p in polygons if p.orientation == CW)
    assert cw_words == [("a", "b", "c"), ("b", "c", "a"), ("c", "a", "b")]


def test_sphere3_polygons_up_to_one_puncture(sphere3):
    polygons = enumerate_midpoint_polygons(sphere3, 1)
    assert len(polygons) == 12
    assert Counter(p.orientation for p in polygons) == {CW: 6, CCW: 6}
    monogons = [p for p in polygons if p.degree == 1]
    assert len(monogons) == 6
    assert all(len(p.arcs) == 1 for p in monogons)
    assert sorted(p.punctures for p in monogons) == [("qa",), ("qa",), ("qb",), ("qb",), ("qc",), ("qc",)]


def test_torus4_degree_zero_polygons(torus4):
    assert len(enumerate_midpoint_polygons(torus4, 0)) == 16


def test_sign_law_holds(sphere3):
    assert sign_law_check(enumerate_midpoint_polygons(sphere3, 1)) == []


def test_polygon_filter(sphere3):
    found = enumerate_midpoint_polygons(sphere3, 0, PolygonFilter(orientation=CW, last="a"))
    assert [p.arcs for p in found] == [("a", "b", "c")]


def test_polygon_dump_is_sorted_text(sphere3):
    dump = polygon_dump(enumerate_midpoint_polygons(sphere3, 0)).splitlines()
    assert dump == sorted(dump)
    assert dump[0].startswith("ccw  ")


def test_negative_order_is_rejected(sphere3):
    with pytest.raises(DisksError) as exc:
        enumerate_midpoint_polygons(sphere3, -1)
    assert exc.value.code == "INVALID_ORDER"


def test_deformed_superpotential_of_sphere3_is_undeformed(sphere3, sphere3_mirror):
    w = deformed_superpotential(sphere3, 1, sphere3_mirror)
    assert w == classical_superpotential(sphere3_mirror, 1)


def test_deformed_potential_of_sphere3(sphere3, sphere3_mirror):
    ell = deformed_potential(sphere3, 1, dq=sphere3_mirror)
    assert ell.serialize() == "+1*[a b c] -1*qa*[a] -1*qb*[b] -1*qc*[c]"


def test_deformed_complement(sphere3, sphere3_mirror):
    assert deformed_complement("a", sphere3, 1, sphere3_mirror).serialize() == "+1*[b c] -1*qa*[@L1]"
    with pytest.raises(DisksError) as exc:
        deformed_complement("z", sphere3, 1)
    assert exc.value.code == "NOT_AN_ARC"


def test_deformed_mirror_object_curvature(sphere3, sphere3_mirror):
    mf = deformed_mirror_object("a", sphere3, 2, dq=sphere3_mirror)
    assert mf.f.serialize() == "+1*[a]"
    assert mf.curvature_even.serialize() == "-1*qb*[b] -1*qc*[c]"
    assert mf.curvature_even.at_zero().is_zero()


def test_resolve_identities(sphere3):
    assert resolve_identities(sphere3) == [("a", "R")]
    assert resolve_identities(sphere3, {0: "b"}) == [("b", "R")]
    assert resolve_identities(sphere3, {0: "b:L"}) == [("b", "L")]
    with pytest.raises(DisksError) as exc:
        resolve_identities(sphere3, {0: ("z", "R")})
    assert exc.value.code == "INVALID_IDENTITY"


def test_l_polygon_multiplicity_of_a_face(sphere3):
    (face,) = enumerate_midpoint_polygons(sphere3, 0, PolygonFilter(orientation=CW, last="a"))
    assert l_polygon_multiplicity(face, ("a", "R")) == 1
    assert l_polygon_multiplicity(face, ("b", "R")) == 0


def test_hl_odd_products(sphere3, sphere3_mirror):
    assert hl_odd_product(("a", "b"), sphere3, 1, dq=sphere3_mirror) == {"Y_c": DefSeries.one(1)}
    assert hl_odd_product(("a",), sphere3, 1, dq=sphere3_mirror) == {
        "id_L1": DefSeries.monomial(("qa",), -1, 1),
    }


def test_hl_odd_product_needs_a_path():
    torus4 = load_dimer("torus4")
    with pytest.raises(DisksError) as exc:
        hl_odd_product(("a1", "a1"), torus4, 0)
    assert exc.value.code == "NON_COMPOSABLE"


def test_md_products(sphere3, sphere3_mirror):
    assert md_product("a", "even", sphere3, 1, inputs=("a",), dq=sphere3_mirror) == -1
    assert md_product("a", "even", sphere3, 1, inputs=("b",), dq=sphere3_mirror) == 0
    assert md_product("a", "odd", sphere3, 1, dq=sphere3_mirror) == deformed_complement("a", sphere3, 1, sphere3_mirror)
    assert md_product("a", "odd", sphere3, 1, inputs=("b", "c"), dq=sphere3_mirror) == 1
    assert md_product("a", "odd", sphere3, 1, inputs=(), dq=sphere3_mirror) == DefSeries.monomial(("qa",), -1, 1)
    with pytest.raises(DisksError) as exc:
        md_product("a", "mixed", sphere3, 1)
    assert exc.value.code == "INVALID_PARITY"


def test_identity_shift(sphere3, sphere3_mirror):
    check = identity_shift_check(sphere3, 1, 0, dq=sphere3_mirror)
    assert check.passed, check.detail


def test_product_table_is_cyclic_and_round_trips(sphere3, sphere3_mirror):
    table = product_table(sphere3, 1, dq=sphere3_mirror)
    assert check_cyclicity(table).status == "OK"
    assert chl_superpotential(table) == deformed_superpotential(sphere3, 1, sphere3_mirror)
    text = serialize_product_table(table)
    assert serialize_product_table(parse_product_table(text)) == text


def test_even_spheres_have_no_table():
    with pytest.raises(DisksError) as exc:
        product_table(load_dimer("Q4"), 0)
    assert exc.value.code == "UNSUPPORTED_DIMER"


def test_oracle_agrees_on_sphere3(sphere3):
    checks = oracle_checks(sphere3, 1)
    assert checks
    assert [c.name for c in checks if not c.passed] == []


def test_resolve_identities_rejects_unknown_path(sphere3):
    with pytest.raises(DisksError) as exc:
        resolve_identities(sphere3, {8: "a"})
    assert exc.value.code == "INVALID_IDENTITY"


def test_oracle_reports_face_checks(sphere3):
    checks = {c.name: c for c in oracle_checks(sphere3, 1)}
    assert checks["degree-0 polygons"].passed
    assert checks["W_q at q=0"].passed


def test_oracle_agrees_on_torus4(torus4):
    checks = oracle_checks(torus4, 1)
    assert [c.name for c in checks if not c.passed] == []


# ---------------------------------------------------------------------------
# sphere3 at higher orders
# ---------------------------------------------------------------------------

def test_deformed_superpotential_of_sphere3_at_order_four(sphere3, sphere3_mirror):
    assert deformed_superpotential(sphere3, 4, sphere3_mirror) == classical_superpotential(sphere3_mirror, 4)


def test_deformed_potential_of_sphere3_at_order_two(sphere3, sphere3_mirror):
    ell = deformed_potential(sphere3, 2, dq=sphere3_mirror)
    assert ell.serialize() == "+1*[a b c] -1*qa*[a] -1*qb*[b] -1*qc*[c]"


@pytest.mark.parametrize("arc, g, curvature", [
    ("a", "+1*[b c] -1*qa*[@L1]", "-1*qb*[b] -1*qc*[c]"),
    ("b", "+1*[c a] -1*qb*[@L1]", "-1*qa*[a] -1*qc*[c]"),
    ("c", "+1*[a b] -1*qc*[@L1]", "-1*qa*[a] -1*qb*[b]"),
])
def test_deformed_mirror_objects_of_sphere3(sphere3, sphere3_mirror, arc, g, curvature):
    mf = deformed_mirror_object(arc, sphere3, 2, dq=sphere3_mirror)
    assert mf.f.serialize() == f"+1*[{arc}]"
    assert mf.g.serialize() == g
    assert mf.curvature_even.serialize() == curvature
    assert mf.curvature_odd.serialize() == curvature


# ---------------------------------------------------------------------------
# torus4 census and deformed potentials
# ---------------------------------------------------------------------------

Q = ("q1", "q2", "q3", "q4")
Q14 = ("q1", "q4")
Q23 = ("q2", "q3")

# (orientation, base monomial, l-step, k-step, arcs); the family member
# (k, l) covers base · l-step^l · k-step^k · (q1 q2 q3 q4)^(2kl)
TORUS4_FAMILIES = {
    "cw1": (CW, (), Q23, Q14, "b1 a4 b2 a2"),
    "cw2": (CW, ("q3",), Q23, Q14 + Q, "b4 a1 b2 a2"),
    "cw3": (CW, ("q4",), Q23 + Q, Q14, "b1 a1 b3 a2"),
    "cw4": (CW, Q, Q23 + Q, Q14 + Q, "b4 a4 b3 a2"),
    "cw5": (CW, (), Q23, Q14, "b4 a1 b3 a3"),
    "cw6": (CW, ("q2",), Q23, Q14 + Q, "b1 a4 b3 a3"),
    "cw7": (CW, ("q1",), Q23 + Q, Q14, "b4 a4 b2 a3"),
    "cw8": (CW, Q, Q23 + Q, Q14 + Q, "b1 a1 b2 a3"),
    "ccw1": (CCW, (), Q14, Q23, "b2 a3 b1 a1"),
    "ccw2": (CCW, ("q4",), Q14, Q23 + Q, "b3 a2 b1 a1"),
    "ccw3": (CCW, ("q3",), Q14 + Q, Q23, "b2 a2 b4 a1"),
    "ccw4": (CCW, Q, Q14 + Q, Q23 + Q, "b3 a3 b4 a1"),
    "ccw5": (CCW, (), Q14, Q23, "b3 a2 b4 a4"),
    "ccw6": (CCW, ("q1",), Q14, Q23 + Q, "b2 a3 b4 a4"),
    "ccw7": (CCW, ("q2",), Q14 + Q, Q23, "b3 a3 b1 a4"),
    "ccw8": (CCW, Q, Q14 + Q, Q23 + Q, "b2 a2 b1 a4"),
}


def _family_members(family, max_degree):
    _, base, l_step, k_step, _ = TORUS4_FAMILIES[family]
    for k in range(max_degree + 1):
        for l in range(max_degree + 1):
            mono = base + l_step * l + k_step * k + Q * (2 * k * l)
            if len(mono) <= max_degree:
                yield k, l, tuple(sorted(mono))


def _cyclic_class(arcs):
    arcs = tuple(arcs)
    return min(arcs[i:] + arcs[:i] for i in range(len(arcs)))


def test_torus4_census_up_to_degree_six(torus4):
    polygons = enumerate_midpoint_polygons(torus4, 6)
    assert len(polygons) == 224
    assert Counter(p.degree for p in polygons) == {0: 16, 1: 32, 2: 32, 3: 32, 4: 48, 5: 32, 6: 32}
    assert Counter(p.orientation for p in polygons) == {CW: 112, CCW: 112}
    assert all(p.sign == 1 for p in polygons)

    expected = Counter()
    for family, (orientation, _, _, _, word) in TORUS4_FAMILIES.items():
        for _, _, mono in _family_members(family, 6):
            # one polygon per corner
            expected[(orientation, _cyclic_class(word.split()), mono)] += 4
    found = Counter((p.orientation, _cyclic_class(p.arcs), p.punctures) for p in polygons)
    assert found == expected


def test_torus4_superpotential_coefficient(torus4, torus4_mirror):
    w = deformed_superpotential(torus4, 4, torus4_mirror)
    expected = parse_series("+1 +1*q1*q4 +1*q2*q3 -1*q1*q2*q3*q4 +1*q1^2*q4^2 +1*q2^2*q3^2", 4)
    assert w.coefficient("b1 a4 b2 a2") == expected
    assert w.coefficient("b3 a2 b4 a4") == -expected


def test_torus4_superpotential_at_order_three(torus4, torus4_mirror):
    w = deformed_superpotential(torus4, 3, torus4_mirror)
    assert w.coefficient("b2 a2 b1 a4") == parse_series("+1 +1*q1*q4 +1*q2*q3", 3)
    assert w.at_zero() == classical_superpotential(torus4_mirror, 3)


def _l_plus_one(k, l):
    return l + 1


def _l(k, l):
    return l


def _k_plus_one(k, l):
    return k + 1


def _k(k, l):
    return k


# ℓ_{q,i} written as Σ multiplicity(k, l) · member(k, l) · arcs over families
POTENTIAL_DISPLAYS = {
    2: [
        ("b1 a4 b2 a2", [(_l, "cw1"), (_l_plus_one, "ccw8")]),
        ("b1 a1 b3 a2", [(_l, "cw3"), (_l_plus_one, "ccw2")]),
        ("b4 a1 b2 a2", [(_l, "cw2"), (_l_plus_one, "ccw3")]),
        ("b4 a4 b3 a2", [(_l, "cw4"), (_l_plus_one, "ccw5")]),
        ("b1 a4 b3 a3", [(_l_plus_one, "cw6"), (_l, "ccw7")]),
        ("b1 a1 b2 a3", [(_l_plus_one, "cw8"), (_l, "ccw1")]),
        ("b4 a1 b3 a3", [(_l, "cw5"), (_l_plus_one, "ccw4")]),
        ("b4 a4 b2 a3", [(_l, "cw7"), (_l_plus_one, "ccw6")]),
    ],
    3: [
        ("a2 b1 a4 b2", [(_k_plus_one, "cw1"), (_k, "ccw8")]),
        ("a2 b1 a1 b3", [(_k_plus_one, "cw3"), (_k, "ccw2")]),
        ("a2 b4 a1 b2", [(_k_plus_one, "cw2"), (_k, "ccw3")]),
        ("a2 b4 a4 b3", [(_k_plus_one, "cw4"), (_k, "ccw5")]),
        ("a3 b4 a1 b3", [(_k, "cw5"), (_k_plus_one, "ccw4")]),
        ("a3 b4 a4 b2", [(_k_plus_one, "cw7"), (_k, "ccw6")]),
        ("a3 b1 a4 b3", [(_k, "cw6"), (_k_plus_one, "ccw7")]),
        ("a3 b1 a1 b2", [(_k_plus_one, "cw8"), (_k, "ccw1")]),
    ],
}


def _displayed_potential(quiver, index, order):
    total = NCPoly.zero(quiver, order)
    for word, families in POTENTIAL_DISPLAYS[index]:
        coeff = DefSeries.zero(order)
        for multiplicity, family in families:
            for k, l, mono in _family_members(family, order):
                coeff = coeff + DefSeries.monomial(mono, multiplicity(k, l), order)
        total = total + NCPoly.from_word(quiver, word, coeff=coeff, order=order)
    return total


def test_torus4_potential_parts_at_order_one(torus4, torus4_mirror):
    parts = deformed_potential_parts(torus4, 1, {2: ("a2", LEFT), 3: ("a2", RIGHT)}, torus4_mirror)
    quiver = torus4_mirror.quiver
    assert parts[2] == parse_ncpoly(
        "+1*[b4 a4 b3 a2] +1*q4*[b1 a1 b3 a2] +1*q3*[b4 a1 b2 a2] +1*q2*[b1 a4 b3 a3] +1*q1*[b4 a4 b2 a3]",
        quiver, 1,
    )
    assert parts[3] == parse_ncpoly(
        "+1*[a2 b1 a4 b2] +1*q4*[a2 b1 a1 b3] +1*q3*[a2 b4 a1 b2] +1*q1*[a3 b4 a4 b2] +1*q2*[a3 b1 a4 b3]",
        quiver, 1,
    )


def test_torus4_potential_parts_up_to_degree_five(torus4, torus4_mirror):
    parts = deformed_potential_parts(torus4, 5, {2: ("a2", LEFT), 3: ("a2", RIGHT)}, torus4_mirror)
    for index in (2, 3):
        assert parts[index] == _displayed_potential(torus4_mirror.quiver, index, 5)


def test_torus4_deformed_potential_is_central(torus4, torus4_mirror):
    order = 2
    w = deformed_superpotential(torus4, order, torus4_mirror)
    relations = [cyclic_derivative(w, arc) for arc in torus4_mirror.arc_ids()]
    ell = deformed_potential(torus4, order, dq=torus4_mirror)
    a2 = NCPoly.from_word(torus4_mirror.quiver, ["a2"], order=order)
    verdict = ideal_membership_truncated(mul(ell, a2) - mul(a2, ell), relations, order, 5)
    assert verdict.status == "MEMBER"
