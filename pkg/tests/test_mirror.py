import pytest

from errors import MirrorError
from jacobi import normal_form
from mirror import (
    Angle,
    MatrixFactorization,
    MFMorphism,
    centrality_check,
    classical_mirror_object,
    classical_potential,
    classical_superpotential,
    complement,
    compose,
    identity_morphism,
    is_closed,
    mu1,
    potential_terms,
    zeta,
)
from ncpoly import NCPoly, cyc


def test_mirror_of_sphere3_has_one_vertex(sphere3_mirror):
    assert sphere3_mirror.punctures == ("L1",)
    assert all(a.tail == "L1" and a.head == "L1" for a in sphere3_mirror.arcs)


def test_mirror_of_torus4(torus4_mirror):
    assert torus4_mirror.punctures == ("L1", "L2", "L3", "L4")
    assert torus4_mirror.genus == 1
    assert (torus4_mirror.tail("a1"), torus4_mirror.head("a1")) == ("L1", "L2")


def test_classical_superpotential(sphere3_mirror):
    quiver = sphere3_mirror.quiver
    expected = cyc(quiver, "b c a") - cyc(quiver, "c b a")
    assert classical_superpotential(sphere3_mirror) == expected


def test_classical_potential_reduces_to_one_cycle(sphere3_mirror):
    assert classical_potential(sphere3_mirror).serialize() == "+1*[a b c]"


def test_potential_is_central(sphere3_mirror, torus4_mirror):
    assert centrality_check(sphere3_mirror) == []
    assert centrality_check(torus4_mirror) == []


def test_complements(sphere3_mirror, torus4_mirror):
    assert complement(sphere3_mirror, "a") == ("b", "c")
    assert complement(torus4_mirror, "a1") == ("b3", "a3", "b4")


def test_classical_mirror_object_factors_potential(torus4_mirror):
    m = classical_mirror_object(torus4_mirror, "a1")
    assert (m.even, m.odd) == ("L2", "L1")
    assert m.g.serialize() == "+1*[b3 a3 b4]"
    assert m.curvature_even.is_zero()
    assert m.curvature_odd.is_zero()
    assert m.serialize().startswith("M_a1: even L2, odd L1")


def test_classical_mirror_object_rejects_unknown_arc(sphere3_mirror):
    with pytest.raises(MirrorError) as exc:
        classical_mirror_object(sphere3_mirror, "z")
    assert exc.value.code == "NOT_AN_ARC"


def test_identity_morphism_is_closed(sphere3_mirror):
    m = classical_mirror_object(sphere3_mirror, "a")
    ident = identity_morphism(m)
    assert is_closed(ident, sphere3_mirror)
    assert mu1(ident).is_zero()
    assert compose(ident, ident).block("A") == NCPoly.idempotent(sphere3_mirror.quiver, "L1")


def test_zeta_of_a_single_step_angle(sphere3, sphere3_mirror):
    phi = zeta(sphere3, sphere3_mirror, Angle.parse("qa", "b.t", 1))
    assert phi.parity == "odd"
    assert (phi.source.arc, phi.target.arc) == ("b", "c")
    assert phi.block("B").serialize() == "-1*[a]"
    assert phi.block("C").serialize() == "+1*[@L1]"


def test_zeta_rejects_foreign_arc_end(sphere3, sphere3_mirror):
    with pytest.raises(MirrorError) as exc:
        zeta(sphere3, sphere3_mirror, Angle.parse("qa", "a.t", 1))
    assert exc.value.code == "NOT_AN_ANGLE"


def _full_turns(d):
    for puncture in d.punctures:
        ends = d.rotation[puncture]
        yield Angle(puncture, ends[0], len(ends))


@pytest.mark.parametrize("dimer, mirror", [("sphere3", "sphere3_mirror"), ("torus4", "torus4_mirror")])
def test_full_turns_give_closed_diagonal_endomorphisms(request, dimer, mirror):
    d, dq = request.getfixturevalue(dimer), request.getfixturevalue(mirror)
    for angle in _full_turns(d):
        phi = zeta(d, dq, angle)
        assert phi.parity == "even"
        assert phi.source.arc == phi.target.arc == angle.start[0]
        assert phi.block("B").is_zero() and phi.block("C").is_zero()
        assert not phi.block("A").is_zero() and not phi.block("D").is_zero()
        assert all(path.is_cycle for path in phi.block("A").paths())


def test_full_turns_of_sphere3_multiply_by_one_arc(sphere3, sphere3_mirror):
    arcs = {}
    for angle in _full_turns(sphere3):
        phi = zeta(sphere3, sphere3_mirror, angle)
        arcs[angle.puncture] = (phi.block("A").serialize(), phi.block("D").serialize())
    assert arcs == {"qa": ("+1*[a]", "+1*[a]"), "qb": ("+1*[b]", "+1*[b]"), "qc": ("+1*[c]", "+1*[c]")}


def test_multiplication_by_potential_is_exact(sphere3, sphere3_mirror, torus4_mirror):
    # ℓ·id = ½ μ1(δ), so it is zero in cohomology, unlike a full turn
    for dq, arc in ((sphere3_mirror, "a"), (torus4_mirror, "a1")):
        m = classical_mirror_object(dq, arc)
        ell = potential_terms(dq)
        boundary = mu1(MFMorphism(m, m, "odd", {"B": m.g, "C": m.f}))
        assert normal_form(boundary.block("A") - ell.restrict(m.even, m.even).scale(2), dq).is_zero()
        assert normal_form(boundary.block("D") - ell.restrict(m.odd, m.odd).scale(2), dq).is_zero()
    m = classical_mirror_object(sphere3_mirror, "b")
    full_turn = zeta(sphere3, sphere3_mirror, Angle.parse("qa", "b.t", 2))
    assert not normal_form(full_turn.block("A") - potential_terms(sphere3_mirror).restrict(m.even, m.even),
                           sphere3_mirror).is_zero()


def test_build_reduces_the_curvature(sphere3_mirror):
    quiver = sphere3_mirror.quiver
    f = NCPoly.from_word(quiver, ["a"])
    g = NCPoly.from_word(quiver, ["b", "c"])
    rotated = NCPoly.from_word(quiver, ["c", "a", "b"])
    m = MatrixFactorization.build("a", "L1", "L1", f, g, rotated, sphere3_mirror)
    assert m.is_flat()
    raw = MatrixFactorization.build("a", "L1", "L1", f, g, rotated, None)
    assert not raw.curvature_even.is_zero()
