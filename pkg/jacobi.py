"""
F-term rewriting and Jacobi-algebra computations.

Classical quotients are handled combinatorially: two paths are equal in
Jac iff they are connected by F-term flips, so each path is replaced by
the (length, lex)-least member of its class. Deformed quotients are
handled by truncated exact linear algebra (see ``linalg``).
"""

import itertools
import logging
import random
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from cachetools import LRUCache
from cachetools.keys import hashkey

import linalg
from backend.models import (
    BoundedTypeVerdict,
    CancellationViolation,
    MembershipVerdict,
    QuasiFlatVerdict,
)
from dimer import CCW, CW, Dimer
from errors import JacobiError
from ncpoly import DefSeries, NCPoly, Path, mono_str, rotate_word
from settings import get_settings

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Relation systems and F-term classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationSystem:
    """Groups of mutually equivalent path words over one quiver.

    For a dimer each arc e gives the group {r_e^+, r_e^-} of the remainders
    of its clockwise and counterclockwise faces. ``faces`` holds the written
    face boundaries (empty for raw relation bases).
    """

    quiver: object
    groups: tuple
    faces: tuple = ()

    @classmethod
    def from_dimer(cls, d):
        groups = []
        for arc_id in d.arc_ids():
            pair = []
            for orientation in (CW, CCW):
                face = d.faces[d.face_of(arc_id, orientation)[0]]
                word = face.boundary
                k = word.index(arc_id)
                pair.append(rotate_word(word, k)[1:])
            groups.append(tuple(pair))
        return cls(d.quiver, tuple(groups), tuple(f.boundary for f in d.faces))

    @classmethod
    def from_basis(cls, relations):
        """Each basis element relates all paths occurring in it."""
        if not relations:
            raise JacobiError("EMPTY_RELATIONS", "a relation basis needs at least one element")
        quiver = relations[0].quiver
        groups = []
        for rel in relations:
            words = tuple(p.arcs for p in rel.paths())
            if len(words) > 1:
                groups.append(words)
        return cls(quiver, tuple(groups))

    def relation(self, arc_id):
        """r_e^+ - r_e^- as an NCPoly (dimer systems only)."""
        idx = [a for a, _, _ in self.quiver.arcs].index(arc_id)
        plus, minus = self.groups[idx]
        return NCPoly.from_word(self.quiver, plus) - NCPoly.from_word(self.quiver, minus)

    def face_cycles_at(self, vertex):
        """Written face words starting and ending at ``vertex``."""
        cycles = []
        for word in self.faces:
            for k in range(len(word)):
                rotated = rotate_word(word, k)
                if self.quiver.head(rotated[0]) == vertex:
                    cycles.append(rotated)
        return cycles


def _system(source):
    if isinstance(source, RelationSystem):
        return source
    if isinstance(source, Dimer):
        return RelationSystem.from_dimer(source)
    return RelationSystem.from_basis(list(source))


def _as_path(quiver, path):
    if isinstance(path, Path):
        return path
    if isinstance(path, str):
        path = path.split()
    return quiver.path(tuple(path))


def flips(path, source):
    """All paths obtained from ``path`` by one F-term flip."""
    system = _system(source)
    arcs = path.arcs
    out = set()
    for group in system.groups:
        for member in group:
            width = len(member)
            if width == 0 or width > len(arcs):
                continue
            for i in range(len(arcs) - width + 1):
                if arcs[i:i + width] != member:
                    continue
                for other in group:
                    if other == member:
                        continue
                    new = arcs[:i] + other + arcs[i + width:]
                    out.add(Path(new, path.source, path.target))
    out.discard(path)
    return sorted(out, key=Path.sort_key)


@dataclass
class FtermClass:
    representative: Path
    members: frozenset
    saturated: bool
    parents: dict = field(default_factory=dict, repr=False)
    overflow: Optional[Path] = None

    def chain(self, member):
        """Flip chain from the start path to ``member``."""
        out = [member]
        while self.parents.get(out[-1]) is not None:
            out.append(self.parents[out[-1]])
        return list(reversed(out))


_class_cache = LRUCache(maxsize=50_000)
_class_lock = threading.Lock()


def fterm_class(path, source, length_cap):
    """BFS closure of ``path`` under F-term flips.

    Members longer than ``length_cap`` are recorded but not expanded and
    mark the class unsaturated.
    """
    system = _system(source)
    path = _as_path(system.quiver, path)
    key = hashkey(system, path, length_cap)
    with _class_lock:
        cached = _class_cache.get(key)
    if cached is not None:
        return cached

    limit = get_settings().class_size_limit
    parents = {path: None}
    queue = deque([path])
    saturated = True
    overflow = None
    while queue:
        cur = queue.popleft()
        if len(cur) > length_cap:
            saturated = False
            overflow = overflow or cur
            continue
        for nxt in flips(cur, system):
            if nxt in parents:
                continue
            parents[nxt] = cur
            queue.append(nxt)
        if len(parents) > limit:
            saturated = False
            overflow = overflow or max(parents, key=len)
            break

    members = frozenset(parents)
    cls = FtermClass(
        representative=min(members, key=Path.sort_key),
        members=members,
        saturated=saturated,
        parents=parents,
        overflow=overflow,
    )
    with _class_lock:
        _class_cache[key] = cls
        if saturated:
            for member in members:
                _class_cache.setdefault(hashkey(system, member, length_cap), cls)
    return cls


# ---------------------------------------------------------------------------
# Jacobi elements
# ---------------------------------------------------------------------------

@dataclass
class JacobiElement:
    value: NCPoly
    reduced: bool
    context: RelationSystem

    def is_zero(self):
        return self.value.is_zero()

    def __eq__(self, other):
        if not isinstance(other, JacobiElement):
            return NotImplemented
        return self.value == other.value

    def serialize(self):
        return self.value.serialize()


def default_length_cap(source, q_order=0):
    system = _system(source)
    longest = max((len(w) for w in system.faces), default=3)
    return 3 * longest * (q_order + 1)


def normal_form(x, source, length_cap=None):
    """Replace every path by its class representative."""
    system = _system(source)
    if isinstance(x, JacobiElement):
        x = x.value
    length_cap = length_cap if length_cap is not None else max(default_length_cap(system), x.max_length())
    terms = {}
    for path, coeff in x.items():
        cls = fterm_class(path, system, length_cap)
        if not cls.saturated:
            raise JacobiError(
                "CLASS_UNBOUNDED_SUSPECTED",
                f"F-term class of {path.word()} exceeds length {length_cap}",
                witness=[p.word() for p in cls.chain(cls.overflow)],
            )
        rep = cls.representative
        terms[rep] = terms[rep] + coeff if rep in terms else coeff
    return JacobiElement(NCPoly(x.quiver, terms, x.order), True, system)


def jacobi_equal(x, y, source, length_cap=None):
    return normal_form(x - y, source, length_cap).is_zero()


# ---------------------------------------------------------------------------
# Crossings
# ---------------------------------------------------------------------------

def contains_face(path, system):
    arcs = path.arcs
    for word in system.faces:
        for k in range(len(word)):
            rotated = rotate_word(word, k)
            for i in range(len(arcs) - len(rotated) + 1):
                if arcs[i:i + len(rotated)] == rotated:
                    return True
    return False


def crossing_count(path, zigzag, d):
    """Number of times the closed path ``path`` crosses ``zigzag``.

    The path is read in walking order and aligned cyclically with the arc
    sequence of the zigzag path; a maximal common run crosses iff its
    length is odd.
    """
    system = _system(d)
    path = _as_path(system.quiver, path)
    if not path.is_cycle or not path.arcs:
        raise JacobiError("NOT_LFREE", f"{path.word()} is not a closed path")
    if contains_face(path, system):
        raise JacobiError("NOT_LFREE", f"{path.word()} runs through a face", witness=path.word())

    walk = tuple(reversed(path.arcs))
    zz = zigzag.arcs
    n, m = len(walk), len(zz)
    crossings = 0
    for i in range(n):
        for j in range(m):
            if walk[i] != zz[j]:
                continue
            if walk[(i - 1) % n] == zz[(j - 1) % m]:
                continue
            run = 1
            while run < n and walk[(i + run) % n] == zz[(j + run) % m]:
                run += 1
            if run < n and run % 2 == 1:
                crossings += 1
    return crossings


# ---------------------------------------------------------------------------
# Bounded type
# ---------------------------------------------------------------------------

def perfect_matchings(source):
    """Arc sets meeting every face boundary exactly once.

    ``source`` is a Dimer or a list of face arc sets.
    """
    if isinstance(source, Dimer):
        faces = [frozenset(f.traversal) for f in source.faces]
    else:
        faces = [frozenset(f) for f in source]
    arc_faces = {}
    for idx, face in enumerate(faces):
        for arc in face:
            arc_faces.setdefault(arc, []).append(idx)

    found = []

    def extend(chosen, covered, idx):
        while idx < len(faces) and idx in covered:
            idx += 1
        if idx == len(faces):
            found.append(frozenset(chosen))
            return
        for arc in sorted(faces[idx]):
            hit = arc_faces[arc]
            if any(i in covered for i in hit):
                continue
            extend(chosen + [arc], covered | set(hit), idx + 1)

    extend([], frozenset(), 0)
    return sorted(found, key=sorted)


def matching_grading(d):
    """Arc grading given by the sum of all perfect matchings."""
    grading = {arc: 0 for arc in d.arc_ids()}
    for matching in perfect_matchings(d):
        for arc in matching:
            grading[arc] += 1
    return grading


def bounded_type_check(source, length_cap, cancellation_consistent=True):
    """Certify bounded type structurally, else fall back to class BFS."""
    system = _system(source)
    reasons = []
    if isinstance(source, Dimer):
        lengths = {len(f) for f in source.faces}
        if len(lengths) == 1:
            reasons.append("equal face lengths")
        if source.genus == 1 and all(v > 0 for v in matching_grading(source).values()):
            reasons.append("torus grading")
        if cancellation_consistent and min(lengths) > 3:
            reasons.append("no triangles")
    if reasons:
        return BoundedTypeVerdict(status="BOUNDED_CERTIFIED", reasons=reasons, length_cap=length_cap)

    starts = [Path(w, system.quiver.tail(w[-1]), system.quiver.head(w[0])) for w in system.faces]
    for group in system.groups:
        for word in group:
            if word:
                starts.append(system.quiver.path(word))
    for start in starts:
        cls = fterm_class(start, system, length_cap)
        if not cls.saturated:
            chain = [p.word() for p in cls.chain(cls.overflow)]
            logger.info(f"✗ F-term class of {start.word()} leaves the length cap: {' ~ '.join(chain)}")
            return BoundedTypeVerdict(
                status="UNBOUNDED_SUSPECTED", length_cap=length_cap, witness=chain,
            )
    return BoundedTypeVerdict(status="BOUNDED_UP_TO_CAP", length_cap=length_cap)


def paths_of_length(quiver, length):
    """All paths with exactly ``length`` arcs (idempotents for 0)."""
    if length == 0:
        return [quiver.idempotent(v) for v in quiver.vertices]
    out = [quiver.path((a,)) for a in quiver.arc_ids()]
    for _ in range(length - 1):
        out = [
            Path((arc,) + p.arcs, p.source, quiver.head(arc))
            for p in out
            for arc in quiver.out_arcs(p.target)
        ]
    return sorted(out, key=Path.sort_key)


def h_table(source, max_length, length_cap):
    """Empirical h(N): longest path F-related to a path of length <= N.

    ``None`` marks an N whose classes left the length cap.
    """
    system = _system(source)
    table = {}
    best = 0
    for n in range(max_length + 1):
        for path in paths_of_length(system.quiver, n):
            cls = fterm_class(path, system, length_cap)
            if not cls.saturated:
                best = None
                break
            best = max(best, max(len(m) for m in cls.members))
        table[n] = best
        if best is None:
            for rest in range(n + 1, max_length + 1):
                table[rest] = None
            break
    return table


def cancellation_audit(d, samples=50, seed=0, max_length=4, length_cap=None):
    """Randomized check that p·ℓ_v = q·ℓ_v forces p = q."""
    system = _system(d)
    quiver = system.quiver
    rng = random.Random(seed)
    cap = length_cap or default_length_cap(system) + max_length
    violations = []
    for _ in range(samples):
        vertex = rng.choice(quiver.vertices)
        arcs = []
        cur = vertex
        for _ in range(rng.randint(1, max_length)):
            choices = quiver.out_arcs(cur)
            if not choices:
                break
            arc = rng.choice(choices)
            arcs.insert(0, arc)
            cur = quiver.head(arc)
        if not arcs:
            continue
        p = quiver.path(tuple(arcs))
        cycles = system.face_cycles_at(p.source)
        if not cycles:
            continue
        with_potential = Path(p.arcs + cycles[0], p.source, p.target)
        p_rep = fterm_class(p, system, cap).representative
        for member in fterm_class(with_potential, system, cap).members:
            for cycle in cycles:
                width = len(cycle)
                if len(member) <= width or member.arcs[-width:] != cycle:
                    continue
                q = Path(member.arcs[:-width], p.source, p.target)
                if fterm_class(q, system, cap).representative != p_rep:
                    violations.append(CancellationViolation(
                        left=p.word(), right=q.word(), vertex=p.source,
                        reduced_with_potential=member.word(),
                    ))
    return violations


# ---------------------------------------------------------------------------
# Truncated linear algebra for deformed ideals
# ---------------------------------------------------------------------------

def _variables(polys):
    names = set()
    for poly in polys:
        for mono, _, _ in poly.flat_terms():
            names.update(mono)
    return sorted(names)


def _monomials(variables, order):
    for degree in range(order + 1):
        yield from itertools.combinations_with_replacement(variables, degree)


def _paths_between(quiver, source, target, length, cache):
    key = (source, target, length)
    if key not in cache:
        cache[key] = [p for p in paths_of_length(quiver, length) if p.source == source and p.target == target]
    return cache[key]


def _vector(poly):
    return {(mono, path): coeff for mono, path, coeff in poly.flat_terms()}


def _generators(relations, endpoint_pairs, allowed_lengths, q_order, variables):
    """(record, column) pairs for m·p·r·s within the caps."""
    if not relations:
        return []
    quiver = relations[0].quiver
    path_cache = {}
    out = []
    for r_idx, rel in enumerate(relations):
        rel = rel.truncate(q_order)
        for r_src, r_tgt in sorted(rel.endpoints()):
            part = rel.restrict(source=r_src, target=r_tgt)
            width = part.max_length()
            for x_src, x_tgt in sorted(endpoint_pairs):
                for total in sorted(allowed_lengths):
                    extra = total - width
                    if extra < 0:
                        continue
                    for i in range(extra + 1):
                        for left in _paths_between(quiver, r_tgt, x_tgt, i, path_cache):
                            for right in _paths_between(quiver, x_src, r_src, extra - i, path_cache):
                                left_p = NCPoly.from_path(quiver, left, order=q_order)
                                right_p = NCPoly.from_path(quiver, right, order=q_order)
                                base = left_p * part * right_p
                                if base.is_zero():
                                    continue
                                for mono in _monomials(variables, q_order):
                                    column = base.map_coefficients(
                                        lambda c, m=mono: c * _monomial_series(m, q_order)
                                    )
                                    if column.is_zero():
                                        continue
                                    record = {
                                        "monomial": mono_str(mono) or "1",
                                        "degree": len(mono),
                                        "left": left.word(),
                                        "relation": r_idx,
                                        "right": right.word(),
                                    }
                                    out.append((record, _vector(column)))
    return out


def _monomial_series(mono, order):
    return DefSeries.monomial(mono, 1, order)


def is_homogeneous(poly, grading=None):
    """Whether all paths of ``poly`` share one degree; path length by default."""
    if grading is None:
        degrees = {len(path) for path in poly.paths()}
    else:
        degrees = {sum(grading[a] for a in path.arcs) for path in poly.paths()}
    return len(degrees) <= 1


def ideal_membership_truncated(x, relations, q_order, length_cap):
    """Is x in the two-sided ideal of ``relations`` modulo m^(q_order+1)?"""
    started = time.time()
    for rel in relations:
        if rel.quiver != x.quiver:
            raise JacobiError("QUIVER_MISMATCH", "relations and element live on different quivers")
    x = x.truncate(q_order)
    if x.is_zero():
        return MembershipVerdict(status="MEMBER", q_order=q_order, length_cap=length_cap, combination=[])

    if all(is_homogeneous(r) for r in relations) and is_homogeneous(x):
        allowed = {n for n in x.lengths() if n <= length_cap}
    else:
        allowed = set(range(length_cap + 1))
    variables = _variables([x, *relations])
    gens = _generators(relations, x.endpoints(), allowed, q_order, variables)
    system = linalg.ColumnSystem(col for _, col in gens)
    logger.info(f"→ Ideal membership: {len(gens)} generators, {len(system.rows)} rows")
    solution = linalg.solve(system, _vector(x))
    elapsed = time.time() - started
    if solution is None:
        logger.info(f"✗ Not a member up to caps ({elapsed:.2f}s)")
        return MembershipVerdict(status="NOT_MEMBER_UP_TO_CAPS", q_order=q_order, length_cap=length_cap)
    combination = []
    for j, coeff in sorted(solution.items()):
        record = dict(gens[j][0])
        record["coeff"] = str(coeff)
        combination.append(record)
    logger.info(f"✓ Member with {len(combination)} generator terms ({elapsed:.2f}s)")
    return MembershipVerdict(
        status="MEMBER", q_order=q_order, length_cap=length_cap, combination=combination,
    )


def quasi_flat_check_truncated(relations, q_order, length_cap):
    """Check ideal ∩ m·A ⊆ m·ideal inside the caps."""
    if not relations:
        return QuasiFlatVerdict(status="QUASI_FLAT", q_order=q_order, length_cap=length_cap)
    quiver = relations[0].quiver
    pairs = {(s, t) for s in quiver.vertices for t in quiver.vertices}
    variables = _variables(relations)
    gens = _generators(relations, pairs, set(range(length_cap + 1)), q_order, variables)
    system = linalg.ColumnSystem(col for _, col in gens)
    deformed = linalg.ColumnSystem(col for rec, col in gens if rec["degree"] >= 1)

    candidates = []
    for coeffs in linalg.nullspace(system, keep_row=lambda key: key[0] == ()):
        vector = linalg.combine(system, coeffs)
        if vector:
            candidates.append(vector)
    for vector in candidates:
        if linalg.solve(deformed, vector) is None:
            terms = {}
            for (mono, path), coeff in vector.items():
                terms.setdefault(path, {})[mono] = coeff
            witness = NCPoly(
                quiver, {p: DefSeries(t, q_order) for p, t in terms.items()}, q_order,
            )
            return QuasiFlatVerdict(
                status="VIOLATION", q_order=q_order, length_cap=length_cap, witness=witness.serialize(),
            )
    return QuasiFlatVerdict(status="QUASI_FLAT", q_order=q_order, length_cap=length_cap)


def relation_basis(d, order=0):
    """Classical relations r_e^+ - r_e^- of a dimer, one per arc."""
    system = RelationSystem.from_dimer(d)
    return [system.relation(arc).with_order(order) for arc in d.arc_ids()]

