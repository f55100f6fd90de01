import itertools

import pytest

from errors import JacobiError
from jacobi import (
    RelationSystem,
    bounded_type_check,
    cancellation_audit,
    contains_face,
    crossing_count,
    fterm_class,
    flips,
    h_table,
    ideal_membership_truncated,
    is_homogeneous,
    jacobi_equal,
    matching_grading,
    normal_form,
    perfect_matchings,
    quasi_flat_check_truncated,
    relation_basis,
)
from ncpoly import DefSeries, NCPoly, Quiver, mul, parse_ncpoly


@pytest.fixture
def plane():
    return Quiver(("v",), (("x", "v", "v"), ("y", "v", "v")))


def test_mirror_of_sphere3_is_commutative(sphere3_mirror):
    dq = sphere3_mirror
    assert dq.genus == 1
    x = parse_ncpoly("+1*[b a] -1*[a b]", dq.quiver)
    assert normal_form(x, dq).is_zero()
    assert jacobi_equal(
        NCPoly.from_word(dq.quiver, "c b a"), NCPoly.from_word(dq.quiver, "a b c"), dq,
    )


def test_normal_form_picks_least_representative(sphere3_mirror):
    x = NCPoly.from_word(sphere3_mirror.quiver, "c a b")
    assert normal_form(x, sphere3_mirror).serialize() == "+1*[a b c]"


def test_fterm_class_of_a_cubic_word(sphere3_mirror):
    path = sphere3_mirror.quiver.path(("c", "b", "a"))
    cls = fterm_class(path, sphere3_mirror, 6)
    assert cls.saturated
    assert len(cls.members) == 6
    assert cls.chain(cls.representative)[0] == path


def test_flips_of_a_length_two_path(sphere3_mirror):
    path = sphere3_mirror.quiver.path(("a", "b"))
    assert [p.arcs for p in flips(path, sphere3_mirror)] == [("b", "a")]


def test_relation_basis_of_torus4_mirror(torus4_mirror):
    system = RelationSystem.from_dimer(torus4_mirror)
    rel = system.relation("a1")
    assert rel.serialize() == "-1*[b2 a3 b1] +1*[b3 a3 b4]"
    assert len(relation_basis(torus4_mirror)) == 8


def test_bounded_type_certificates(torus4_mirror):
    verdict = bounded_type_check(torus4_mirror, 12)
    assert verdict.status == "BOUNDED_CERTIFIED"
    assert "equal face lengths" in verdict.reasons


def test_perfect_matchings_cover_each_face_once(torus4_mirror):
    matchings = perfect_matchings(torus4_mirror)
    assert matchings
    for matching in matchings:
        for face in torus4_mirror.faces:
            assert len(matching & set(face.traversal)) == 1


def test_ideal_membership_finds_a_combination(plane):
    rel = NCPoly.from_word(plane, "x y") - NCPoly.from_word(plane, "y x")
    x = NCPoly.from_word(plane, "x x y") - NCPoly.from_word(plane, "x y x")
    verdict = ideal_membership_truncated(x, [rel], 0, 3)
    assert verdict.status == "MEMBER"
    assert verdict.combination


def test_ideal_membership_rejects_lower_degree(plane):
    rel = NCPoly.from_word(plane, "x y") - NCPoly.from_word(plane, "y x")
    verdict = ideal_membership_truncated(NCPoly.from_word(plane, "x"), [rel], 0, 3)
    assert verdict.status == "NOT_MEMBER_UP_TO_CAPS"


def test_quasi_flat_for_classical_relation(plane):
    rel = NCPoly.from_word(plane, "x", order=1)
    verdict = quasi_flat_check_truncated([rel], 1, 2)
    assert verdict.status == "QUASI_FLAT"


def test_quasi_flat_violation_for_pure_deformation(plane):
    q = DefSeries.monomial(("q",), 1, order=1)
    rel = NCPoly.from_word(plane, "x", coeff=q, order=1)
    verdict = quasi_flat_check_truncated([rel], 1, 1)
    assert verdict.status == "VIOLATION"
    assert verdict.witness == "+1*q*[x]"


def test_empty_relation_basis():
    with pytest.raises(JacobiError) as exc:
        RelationSystem.from_basis([])
    assert exc.value.code == "EMPTY_RELATIONS"


def test_h_table_of_a_commutative_mirror(sphere3_mirror):
    assert h_table(sphere3_mirror, 2, 6) == {0: 0, 1: 1, 2: 2}


def test_cancellation_audit_is_reproducible(sphere3_mirror):
    assert cancellation_audit(sphere3_mirror, samples=20, seed=7) == []


def test_crossing_count_rejects_open_and_face_paths(sphere3_mirror, torus4_mirror):
    with pytest.raises(JacobiError) as exc:
        crossing_count(torus4_mirror.quiver.path(("a1",)), torus4_mirror.zigzag_paths[0], torus4_mirror)
    assert exc.value.code == "NOT_LFREE"
    face_path = sphere3_mirror.quiver.path(("a", "b", "c"))
    with pytest.raises(JacobiError) as exc:
        crossing_count(face_path, sphere3_mirror.zigzag_paths[0], sphere3_mirror)
    assert exc.value.code == "NOT_LFREE"
    assert exc.value.witness == "a b c"


def test_unbounded_basis_reports_its_flip_chain():
    quiver = Quiver(("v",), (("A", "v", "v"), ("B", "v", "v"), ("C", "v", "v")))
    ab = NCPoly.from_word(quiver, "A B")
    abc = NCPoly.from_word(quiver, "A B C")
    verdict = bounded_type_check([ab + abc, ab - abc], 3)
    assert verdict.status == "UNBOUNDED_SUSPECTED"
    assert verdict.witness == ["A B", "A B C", "A B C C"]


@pytest.mark.parametrize("mirror", ["sphere3_mirror", "torus4_mirror"])
def test_perfect_matchings_agree_with_subset_search(request, mirror):
    dq = request.getfixturevalue(mirror)
    faces = [set(face.traversal) for face in dq.faces]
    arcs = dq.arc_ids()
    brute = [
        frozenset(subset)
        for size in range(len(arcs) + 1)
        for subset in itertools.combinations(arcs, size)
        if all(len(face & set(subset)) == 1 for face in faces)
    ]
    assert sorted(perfect_matchings(dq), key=sorted) == sorted(brute, key=sorted)


def test_normal_form_is_idempotent_and_a_congruence(sphere3_mirror, torus4_mirror):
    cases = [
        (sphere3_mirror, "+1*[c a b] +2*[b a]", "+1*[c b] -1*[a]"),
        (torus4_mirror, "+1*[a4 b2 a2] -1*[a1 b2 a3]", "+1*[b1] +1*[b4]"),
        (torus4_mirror, "+1*[b2 a3 b1 a1]", "+1*[b3 a3 b4 a1] +3*[b2 a3 b1 a1]"),
    ]
    for dq, x_text, y_text in cases:
        x = parse_ncpoly(x_text, dq.quiver)
        y = parse_ncpoly(y_text, dq.quiver)
        nf_x = normal_form(x, dq).value
        nf_y = normal_form(y, dq).value
        assert normal_form(nf_x, dq).value == nf_x
        assert normal_form(mul(x, y), dq).value == normal_form(mul(nf_x, nf_y), dq).value
        assert normal_form(x + y, dq).value == normal_form(nf_x + nf_y, dq).value


def _closed_walks(quiver, start, length):
    walks = [((), start)]
    for _ in range(length):
        walks = [(w + (arc,), quiver.head(arc)) for w, v in walks for arc in quiver.out_arcs(v)]
    return [quiver.path(tuple(reversed(w))) for w, v in walks if v == start]


def test_crossing_count_accepts_face_free_paths_equivalent_to_faces(torus4):
    system = RelationSystem.from_dimer(torus4)
    candidates = (
        path for path in _closed_walks(torus4.quiver, "q1", 8)
        if not contains_face(path, system)
        and any(contains_face(m, system) for m in fterm_class(path, system, 8).members)
    )
    path = next(candidates, None)
    assert path is not None
    counts = [crossing_count(path, zz, torus4) for zz in torus4.zigzag_paths]
    assert all(c >= 0 for c in counts)


def test_face_free_cycles_are_bounded_by_their_crossings(torus4):
    system = RelationSystem.from_dimer(torus4)
    longest_face = max(len(face) for face in torus4.faces)
    checked = 0
    for length in (4, 8):
        for path in _closed_walks(torus4.quiver, "q2", length):
            if contains_face(path, system):
                continue
            crossings = sum(crossing_count(path, zz, torus4) for zz in torus4.zigzag_paths)
            assert len(path) <= longest_face * (crossings + 1)
            checked += 1
    assert checked


def test_homogeneity_by_length_and_by_matching_grading(plane, torus4_mirror):
    mixed = NCPoly.from_word(plane, "x") + NCPoly.from_word(plane, "x y")
    assert not is_homogeneous(mixed)
    assert is_homogeneous(NCPoly.from_word(plane, "x y") - NCPoly.from_word(plane, "y x"))
    grading = matching_grading(torus4_mirror)
    assert all(v > 0 for v in grading.values())
    assert all(is_homogeneous(rel, grading) for rel in relation_basis(torus4_mirror))
