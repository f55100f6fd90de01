"""
Classical mirror data of a dimer.

The mirror dimer Q̌ has one vertex per zigzag path of Q and the same arcs;
an arc runs from the zigzag turning left at its head to the one turning
right there. On Q̌ we build the superpotential W, the central element ℓ,
the matrix factorizations M_a = (a, ā) and the morphisms ζ attached to
angles of Q.

Morphisms between factorizations are 2×2 block matrices of path-algebra
elements acting by right multiplication, so "first x, then y" is
``mul(x, y)``. For M = (f, g), f maps the even module to the odd one and g
maps back. Blocks of a morphism M → M':

    A: even → even'   D: odd → odd'    (even morphisms)
    C: even → odd'    B: odd → even'   (odd morphisms)
"""

import logging
from dataclasses import dataclass, field

from dimer import CCW, CW, LEFT, Arc, Dimer
from errors import MirrorError
from jacobi import RelationSystem, normal_form
from ncpoly import NCPoly, cyc, mul, rotate_word

logger = logging.getLogger(__name__)

BLOCKS = ("A", "B", "C", "D")
EVEN_BLOCKS = ("A", "D")
ODD_BLOCKS = ("B", "C")


# ---------------------------------------------------------------------------
# Mirror dimer, W and ℓ
# ---------------------------------------------------------------------------

def dual_vertex_ids(d):
    return [f"L{i}" for i in range(1, len(d.zigzag_paths) + 1)]


def dual_dimer(d):
    """Q̌: vertices are the zigzag paths of ``d``, arcs are shared."""
    names = dual_vertex_ids(d)
    tails, heads, rotation = {}, {}, {}
    for name, path in zip(names, d.zigzag_paths):
        ends = []
        for arc_id, turn in path.steps:
            if turn == LEFT:
                tails[arc_id] = name
                ends.append((arc_id, "t"))
            else:
                heads[arc_id] = name
                ends.append((arc_id, "h"))
        rotation[name] = ends
    arcs = [Arc(a.id, tails[a.id], heads[a.id]) for a in d.arcs]
    mirror = Dimer(names, arcs, rotation, name=f"{d.name or 'dimer'}^")
    logger.debug(f"Mirror of {d.name}: {len(names)} vertices, genus {mirror.genus}")
    return mirror


def classical_superpotential(dq, order=0):
    """W = Σ clockwise faces − Σ counterclockwise faces, cyclically expanded."""
    w = NCPoly.zero(dq.quiver, order)
    for face in dq.faces:
        term = cyc(dq.quiver, face.boundary, order)
        w = w + term if face.orientation == CW else w - term
    return w


def face_cycle_at(dq, vertex, choice=0):
    """The ``choice``-th face boundary through ``vertex``, written from it."""
    system = RelationSystem.from_dimer(dq)
    cycles = system.face_cycles_at(vertex)
    if not cycles:
        raise MirrorError("NOT_AN_ARC", f"no face passes through {vertex}")
    return cycles[choice % len(cycles)]


def potential_terms(dq, order=0, choices=None):
    """ℓ = Σ_v ℓ_v before reduction; ``choices`` picks the face per vertex."""
    choices = choices or {}
    ell = NCPoly.zero(dq.quiver, order)
    for vertex in dq.punctures:
        word = face_cycle_at(dq, vertex, choices.get(vertex, 0))
        ell = ell + NCPoly.from_word(dq.quiver, word, order=order)
    return ell


def classical_potential(dq, choices=None, length_cap=None):
    return normal_form(potential_terms(dq, choices=choices), dq, length_cap)


def centrality_check(dq, length_cap=None):
    """Arcs x for which ℓ·x − x·ℓ does not reduce to zero."""
    ell = potential_terms(dq)
    failures = []
    for arc_id in dq.arc_ids():
        x = NCPoly.from_word(dq.quiver, [arc_id])
        if not normal_form(mul(ell, x) - mul(x, ell), dq, length_cap).is_zero():
            failures.append(arc_id)
    return failures


# ---------------------------------------------------------------------------
# Matrix factorizations
# ---------------------------------------------------------------------------

@dataclass
class MatrixFactorization:
    """Two-periodic complex (f, g) on the vertices h(a), t(a); curvature blocks are stored reduced."""

    arc: str
    even: str  # vertex h(a)
    odd: str  # vertex t(a)
    f: NCPoly
    g: NCPoly
    curvature_even: NCPoly
    curvature_odd: NCPoly

    @classmethod
    def build(cls, arc, head, tail, f, g, ell, source, length_cap=None):
        """Factorization (f, g) of ``ell`` with curvature ell·id − δ² reduced in ``source``.

        ``source`` is a dimer or relation system; with None the blocks stay unreduced.
        """
        blocks = [ell.restrict(head, head) - mul(f, g), ell.restrict(tail, tail) - mul(g, f)]
        if source is not None:
            blocks = [normal_form(block, source, length_cap).value for block in blocks]
        return cls(arc, head, tail, f, g, *blocks)

    def is_flat(self):
        return self.curvature_even.is_zero() and self.curvature_odd.is_zero()

    def serialize(self):
        return "\n".join([
            f"M_{self.arc}: even {self.even}, odd {self.odd}",
            f"  f = {self.f.serialize()}",
            f"  g = {self.g.serialize()}",
            f"  curvature_even = {self.curvature_even.serialize()}",
            f"  curvature_odd = {self.curvature_odd.serialize()}",
        ])


def complement(dq, arc_id):
    """ā: the clockwise face through a, read after a (so a·ā = ℓ_{h(a)})."""
    face = dq.faces[dq.face_of(arc_id, CW)[0]]
    word = face.boundary
    return rotate_word(word, word.index(arc_id))[1:]


def classical_mirror_object(dq, arc_id, length_cap=None):
    """M_a = (a, ā), checked to factor ℓ on both modules."""
    if arc_id not in dq.arc_ids():
        raise MirrorError("NOT_AN_ARC", f"{arc_id} is not an arc of {dq.name}")
    quiver = dq.quiver
    f = NCPoly.from_word(quiver, [arc_id])
    g = NCPoly.from_word(quiver, complement(dq, arc_id))
    head, tail = dq.head(arc_id), dq.tail(arc_id)
    ell = potential_terms(dq)
    m = MatrixFactorization.build(arc_id, head, tail, f, g, ell, dq, length_cap)
    if not m.is_flat():
        raise MirrorError("NOT_A_FACTORIZATION", f"(a, ā) does not factor ℓ for {arc_id}")
    return m


# ---------------------------------------------------------------------------
# Morphisms
# ---------------------------------------------------------------------------

@dataclass
class MFMorphism:
    source: MatrixFactorization
    target: MatrixFactorization
    parity: str  # "even" | "odd"
    blocks: dict = field(default_factory=dict)

    def block(self, name):
        quiver = self.source.f.quiver
        return self.blocks.get(name) or NCPoly.zero(quiver, self.source.f.order)

    def is_zero(self):
        return all(self.block(b).is_zero() for b in BLOCKS)

    def serialize(self):
        names = EVEN_BLOCKS if self.parity == "even" else ODD_BLOCKS
        return " | ".join(f"{b} = {self.block(b).serialize()}" for b in names)


def mu1(phi):
    """Differential δ'∘φ − (−1)^|φ| φ∘δ of a morphism of factorizations."""
    src, tgt = phi.source, phi.target
    f, g, f2, g2 = src.f, src.g, tgt.f, tgt.g
    A, B, C, D = (phi.block(b) for b in BLOCKS)
    if phi.parity == "even":
        blocks = {
            "C": mul(A, f2) - mul(f, D),
            "B": mul(D, g2) - mul(g, A),
        }
        parity = "odd"
    else:
        blocks = {
            "A": mul(C, g2) + mul(f, B),
            "D": mul(B, f2) + mul(g, C),
        }
        parity = "even"
    return MFMorphism(src, tgt, parity, blocks)


def compose(phi, psi):
    """First φ, then ψ."""
    if phi.target.arc != psi.source.arc:
        raise MirrorError("NOT_COMPOSABLE", "morphisms do not compose")
    a1, b1, c1, d1 = (phi.block(b) for b in BLOCKS)
    a2, b2, c2, d2 = (psi.block(b) for b in BLOCKS)
    blocks = {
        "A": mul(a1, a2) + mul(c1, b2),
        "D": mul(d1, d2) + mul(b1, c2),
        "C": mul(a1, c2) + mul(c1, d2),
        "B": mul(d1, b2) + mul(b1, a2),
    }
    parity = "even" if phi.parity == psi.parity else "odd"
    return MFMorphism(phi.source, psi.target, parity, blocks)


def is_closed(phi, dq, length_cap=None):
    d = mu1(phi)
    return all(normal_form(d.block(b), dq, length_cap).is_zero() for b in BLOCKS)


def identity_morphism(m):
    quiver = m.f.quiver
    return MFMorphism(m, m, "even", {
        "A": NCPoly.idempotent(quiver, m.even),
        "D": NCPoly.idempotent(quiver, m.odd),
    })


# ---------------------------------------------------------------------------
# ζ for angles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Angle:
    """k counterclockwise steps at ``puncture`` starting from ``start``."""

    puncture: str
    start: tuple  # (arc id, "h" | "t")
    steps: int

    @classmethod
    def parse(cls, puncture, start, steps):
        if isinstance(start, str):
            arc_id, _, kind = start.partition(".")
            start = (arc_id, kind)
        return cls(puncture, tuple(start), int(steps))


def angle_ends(d, angle):
    if angle.puncture not in d.rotation:
        raise MirrorError("NOT_AN_ANGLE", f"unknown puncture {angle.puncture}")
    ends = d.rotation[angle.puncture]
    if angle.start not in ends:
        raise MirrorError("NOT_AN_ANGLE", f"{angle.start[0]}.{angle.start[1]} does not end at {angle.puncture}")
    if angle.steps < 0:
        raise MirrorError("NOT_AN_ANGLE", "an angle needs a nonnegative number of steps")
    i = ends.index(angle.start)
    return [ends[(i + k) % len(ends)] for k in range(angle.steps + 1)]


def _remainder(dq, z_end, z_next):
    """Written remainder of the mirror face holding z then z_next."""
    arc_id, kind = z_end
    orientation = CW if kind == "h" else CCW
    word = dq.faces[dq.face_of(arc_id, orientation)[0]].boundary
    for k in range(len(word)):
        rotated = rotate_word(word, k)
        if rotated[0] == arc_id and rotated[-1] == z_next:
            return rotated[1:-1]
    raise MirrorError("NOT_AN_ANGLE", f"{arc_id} and {z_next} are not consecutive on a mirror face")


def _product(quiver, words, vertex, order):
    out = NCPoly.idempotent(quiver, vertex, order=order)
    for word in words:
        out = mul(out, NCPoly.from_word(quiver, word, order=order)) if word else out
    return out


def zeta(d, dq, angle, length_cap=None, check=True):
    """Morphism M_a → M_b of the angle from a to b at a puncture of ``d``."""
    ends = angle_ends(d, angle)
    a, b = ends[0][0], ends[-1][0]
    rems = [_remainder(dq, ends[i], ends[i + 1][0]) for i in range(angle.steps)]
    quiver = dq.quiver
    m_a = classical_mirror_object(dq, a, length_cap)
    m_b = classical_mirror_object(dq, b, length_cap)
    k = angle.steps
    if k % 2 == 0:
        opp1 = _product(quiver, rems[0:k:2], dq.tail(a), 0)
        opp2 = _product(quiver, rems[1:k:2], dq.head(a), 0)
        phi = MFMorphism(m_a, m_b, "even", {"A": opp2, "D": opp1})
    else:
        opp1 = _product(quiver, rems[0:k:2], dq.tail(a), 0)
        opp2 = _product(quiver, rems[1:k:2], dq.head(a), 0)
        phi = MFMorphism(m_a, m_b, "odd", {"B": -opp1, "C": opp2})
    if check and not is_closed(phi, dq, length_cap):
        raise MirrorError("NOT_CLOSED", f"ζ of the angle {a} → {b} is not closed")
    return phi
