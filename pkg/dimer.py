"""
Dimers on closed oriented punctured surfaces.

A dimer is stored as a rotation system: for every puncture the cyclic,
counterclockwise order of the arc-ends meeting it. Faces, zigzag paths and
the (homology) cover are derived from it.

Conventions used throughout the package:
- an arc-end is ``(arc, "h")`` or ``(arc, "t")``, written ``a.h`` / ``a.t``;
- cw_succ(x) is the arc whose tail follows x's head in the rotation at h(x);
  ccw_succ(x) is the arc whose tail precedes it;
- a zigzag step ``(x, "R")`` continues with cw_succ(x) and a step
  ``(x, "L")`` with ccw_succ(x); turns alternate.
"""

import hashlib
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import networkx as nx

from backend.models import ConsistencyVerdict
from errors import DimerError
from ncpoly import Quiver

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent / "data"
BUILTINS = ("sphere3", "torus4")

CW = "cw"
CCW = "ccw"
LEFT = "L"
RIGHT = "R"


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class Face:
    """An oriented face.

    ``traversal`` lists the boundary arcs in walking order (each arc's head
    is the next arc's tail); ``boundary`` is the same cycle written as a
    path word, i.e. reversed.
    """

    traversal: tuple
    orientation: str

    @property
    def boundary(self):
        return tuple(reversed(self.traversal))

    def __len__(self):
        return len(self.traversal)

    def position(self, arc):
        return self.traversal.index(arc)


@dataclass(frozen=True)
class ZigzagPath:
    steps: tuple  # ((arc, turn), ...)
    identity: int = 0
    coidentity: int = 0

    def __len__(self):
        return len(self.steps)

    @property
    def arcs(self):
        return tuple(arc for arc, _ in self.steps)

    def step(self, index):
        return self.steps[index % len(self.steps)]

    def index(self, arc, turn):
        try:
            return self.steps.index((arc, turn))
        except ValueError:
            return None

    def contains(self, arc, turn):
        return (arc, turn) in self.steps

    @property
    def identity_step(self):
        return self.steps[self.identity]

    def with_identity(self, arc, turn):
        """Move the identity to the step (arc, turn); co-identity follows."""
        idx = self.index(arc, turn)
        if idx is None:
            raise DimerError("NOT_ON_PATH", f"({arc}, {turn}) is not a step of this zigzag path")
        return ZigzagPath(self.steps, idx, _nearest_left(self.steps, idx))

    def with_coidentity(self, index):
        index %= len(self.steps)
        if self.steps[index][1] != LEFT:
            raise DimerError("NOT_ON_PATH", "co-identity must sit at a counterclockwise angle")
        return ZigzagPath(self.steps, self.identity, index)

    def word(self):
        return " ".join(f"{arc}:{turn}" for arc, turn in self.steps)


def _nearest_left(steps, idx):
    return idx if steps[idx][1] == LEFT else (idx + 1) % len(steps)


def _canonical_rotation(steps):
    return min(steps[k:] + steps[:k] for k in range(len(steps)))


def _vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


# ---------------------------------------------------------------------------
# Dimer
# ---------------------------------------------------------------------------

class Dimer:
    """Validated dimer; immutable after construction."""

    def __init__(self, punctures, arcs, rotation, name=None):
        self.name = name
        self.punctures = tuple(punctures)
        self.arcs = tuple(arcs)
        self.rotation = {p: tuple(rotation.get(p, ())) for p in self.punctures}
        self._arc = {arc.id: arc for arc in self.arcs}
        self._validate_rotation()
        self._slot = {
            end: (p, i) for p, ends in self.rotation.items() for i, end in enumerate(ends)
        }
        self.faces = self._trace_faces()
        self._face_of = {}
        for idx, face in enumerate(self.faces):
            for pos, arc in enumerate(face.traversal):
                self._face_of[(arc, face.orientation)] = (idx, pos)
        self._validate_topology()

    # validation -----------------------------------------------------------

    def _validate_rotation(self):
        if len(self._arc) != len(self.arcs):
            raise DimerError("MALFORMED_ROTATION", "duplicate arc id")
        seen = set()
        for p, ends in self.rotation.items():
            for arc_id, kind in ends:
                if arc_id not in self._arc or kind not in ("h", "t"):
                    raise DimerError("MALFORMED_ROTATION", f"unknown arc-end {arc_id}.{kind} at {p}")
                if (arc_id, kind) in seen:
                    raise DimerError(
                        "MALFORMED_ROTATION", f"arc-end {arc_id}.{kind} appears twice",
                        witness=f"{arc_id}.{kind}",
                    )
                seen.add((arc_id, kind))
                arc = self._arc[arc_id]
                if (arc.head if kind == "h" else arc.tail) != p:
                    raise DimerError("MALFORMED_ROTATION", f"{arc_id}.{kind} listed at the wrong puncture {p}")
        missing = {(a.id, k) for a in self.arcs for k in ("h", "t")} - seen
        if missing:
            arc_id, kind = sorted(missing)[0]
            raise DimerError("MALFORMED_ROTATION", f"arc-end {arc_id}.{kind} missing from rotations")

    def _validate_topology(self):
        for face in self.faces:
            if len(face) < 3:
                raise DimerError(
                    "FACE_TOO_SHORT", f"{face.orientation} face {' '.join(face.traversal)} has length {len(face)}",
                    witness=list(face.traversal),
                )
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.punctures)
        graph.add_edges_from((a.tail, a.head) for a in self.arcs)
        if self.punctures and not nx.is_connected(graph):
            raise DimerError("MALFORMED_ROTATION", "the arc system is not connected")
        chi = self.euler_characteristic()
        if chi % 2 or chi > 2:
            raise DimerError("MALFORMED_ROTATION", f"Euler characteristic {chi} is not 2 - 2g")

    # incidence --------------------------------------------------------------

    def arc(self, arc_id):
        try:
            return self._arc[arc_id]
        except KeyError:
            raise DimerError("UNKNOWN_ARC", f"no arc {arc_id}") from None

    def arc_ids(self):
        return [a.id for a in self.arcs]

    def tail(self, arc_id):
        return self.arc(arc_id).tail

    def head(self, arc_id):
        return self.arc(arc_id).head

    def _neighbour_end(self, end, shift):
        p, i = self._slot[end]
        ends = self.rotation[p]
        return ends[(i + shift) % len(ends)]

    def cw_succ(self, arc_id):
        arc_next, kind = self._neighbour_end((arc_id, "h"), 1)
        if kind != "t":
            raise DimerError("ORIENTATION_CLASH", f"{arc_id}.h is followed by a head end at {self.head(arc_id)}")
        return arc_next

    def ccw_succ(self, arc_id):
        arc_next, kind = self._neighbour_end((arc_id, "h"), -1)
        if kind != "t":
            raise DimerError("ORIENTATION_CLASH", f"{arc_id}.h is preceded by a head end at {self.head(arc_id)}")
        return arc_next

    def succ(self, arc_id, turn):
        return self.cw_succ(arc_id) if turn == RIGHT else self.ccw_succ(arc_id)

    def face_of(self, arc_id, orientation):
        """(face index, position of the arc in the face traversal)."""
        return self._face_of[(arc_id, orientation)]

    def _trace_faces(self):
        faces = []
        for orientation, step in ((CW, self.cw_succ), (CCW, self.ccw_succ)):
            visited = set()
            for arc in self.arcs:
                if arc.id in visited:
                    continue
                walk = [arc.id]
                visited.add(arc.id)
                nxt = step(arc.id)
                while nxt != arc.id:
                    walk.append(nxt)
                    visited.add(nxt)
                    nxt = step(nxt)
                start = walk.index(min(walk))
                faces.append(Face(tuple(walk[start:] + walk[:start]), orientation))
        return tuple(faces)

    def faces_with(self, orientation):
        return [f for f in self.faces if f.orientation == orientation]

    # topology -------------------------------------------------------------

    def euler_characteristic(self):
        return len(self.punctures) - len(self.arcs) + len(self.faces)

    @property
    def genus(self):
        return (2 - self.euler_characteristic()) // 2

    def face_adjacency_graph(self):
        graph = nx.Graph()
        for idx, face in enumerate(self.faces):
            graph.add_node(idx, orientation=face.orientation)
        for arc in self.arcs:
            graph.add_edge(self.face_of(arc.id, CW)[0], self.face_of(arc.id, CCW)[0])
        return graph

    @cached_property
    def quiver(self):
        return Quiver(self.punctures, tuple((a.id, a.tail, a.head) for a in self.arcs))

    @cached_property
    def digest(self):
        return hashlib.sha256(serialize_dimer(self).encode()).hexdigest()[:16]

    def angles(self, puncture):
        """Consecutive arc-end pairs at ``puncture`` in counterclockwise order."""
        if puncture not in self.rotation:
            raise DimerError("UNKNOWN_PUNCTURE", f"no puncture {puncture}")
        ends = self.rotation[puncture]
        return [(ends[i], ends[(i + 1) % len(ends)]) for i in range(len(ends))]

    # zigzag paths -----------------------------------------------------------

    @cached_property
    def zigzag_paths(self):
        remaining = {(a.id, turn) for a in self.arcs for turn in (LEFT, RIGHT)}
        paths = []
        for arc in self.arcs:
            for turn in (LEFT, RIGHT):
                if (arc.id, turn) not in remaining:
                    continue
                steps = []
                cur = (arc.id, turn)
                while cur in remaining:
                    remaining.discard(cur)
                    steps.append(cur)
                    x, t = cur
                    cur = (self.succ(x, t), LEFT if t == RIGHT else RIGHT)
                steps = _canonical_rotation(tuple(steps))
                rights = [i for i, (_, t) in enumerate(steps) if t == RIGHT]
                ident = min(rights, key=lambda i: steps[i][0])
                paths.append(ZigzagPath(steps, ident, _nearest_left(steps, ident)))
        paths.sort(key=lambda z: z.steps)
        return tuple(paths)

    def zigzag_at(self, arc_id, turn):
        """(index, zigzag path) of the path containing the step (arc, turn)."""
        for idx, path in enumerate(self.zigzag_paths):
            if path.contains(arc_id, turn):
                return idx, path
        raise DimerError("UNKNOWN_ARC", f"no zigzag step ({arc_id}, {turn})")

    # cover ------------------------------------------------------------------

    @cached_property
    def omega(self):
        """Deck cocycle: arc -> integer vector of length 2g.

        Built from a tree-cotree decomposition; coordinate i is the signed
        number of times the i-th dual basis loop crosses the arc. Sums over
        face boundaries vanish.
        """
        primal = nx.MultiGraph()
        primal.add_nodes_from(self.punctures)
        for arc in self.arcs:
            primal.add_edge(arc.tail, arc.head, key=arc.id)
        tree = {key for _, _, key in nx.minimum_spanning_edges(primal, keys=True, data=False)}

        dual = nx.MultiGraph()
        dual.add_nodes_from(range(len(self.faces)))
        for arc in self.arcs:
            if arc.id not in tree:
                dual.add_edge(self.face_of(arc.id, CW)[0], self.face_of(arc.id, CCW)[0], key=arc.id)
        cotree_edges = list(nx.minimum_spanning_edges(dual, keys=True, data=False))
        cotree = nx.Graph()
        cotree.add_nodes_from(range(len(self.faces)))
        for u, v, key in cotree_edges:
            cotree.add_edge(u, v, arc=key)
        used = tree | {key for _, _, key in cotree_edges}
        leftover = [a.id for a in self.arcs if a.id not in used]

        omega = {a.id: [0] * len(leftover) for a in self.arcs}
        for i, arc_id in enumerate(leftover):
            plus, minus = self.face_of(arc_id, CW)[0], self.face_of(arc_id, CCW)[0]
            omega[arc_id][i] += 1
            route = nx.shortest_path(cotree, minus, plus)
            for u, v in zip(route, route[1:]):
                crossed = cotree.edges[u, v]["arc"]
                omega[crossed][i] += 1 if self.face_of(crossed, CW)[0] == u else -1
        return {arc_id: tuple(vec) for arc_id, vec in omega.items()}

    @property
    def zero_vector(self):
        return (0,) * (2 * self.genus)

    def deck_translation(self, walk):
        """Deck translation of a walk given in traversal order (Σ ω)."""
        total = self.zero_vector
        for arc_id in walk:
            total = _vadd(total, self.omega[self.arc(arc_id).id])
        return total

    def lift_next(self, lifted_arc, turn):
        """Lifted arc reached from ``lifted_arc`` by one zigzag move."""
        arc_id, v = lifted_arc
        return self.succ(arc_id, turn), _vadd(v, self.omega[arc_id])

    # equality -------------------------------------------------------------

    def _canonical_rotation_table(self):
        table = {}
        for p, ends in self.rotation.items():
            k = ends.index(min(ends)) if ends else 0
            table[p] = ends[k:] + ends[:k]
        return table

    def __eq__(self, other):
        if not isinstance(other, Dimer):
            return NotImplemented
        return (
            self.punctures == other.punctures
            and self.arcs == other.arcs
            and self._canonical_rotation_table() == other._canonical_rotation_table()
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"Dimer({self.name or '?'}: {len(self.punctures)} punctures, "
            f"{len(self.arcs)} arcs, {len(self.faces)} faces, genus {self.genus})"
        )


# ---------------------------------------------------------------------------
# Text format and built-ins
# ---------------------------------------------------------------------------

_END = re.compile(r"^([^\s.]+)\.([ht])$")


def build_dimer(text, name=None):
    """Parse the textual dimer format and validate the result."""
    punctures = None
    arcs = []
    rotation = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("punctures:"):
            punctures = line.split(":", 1)[1].split()
        elif line.startswith("arc "):
            parts = line.split()
            if len(parts) != 4:
                raise DimerError("PARSE_ERROR", f"line {lineno}: expected 'arc <id> <tail> <head>'")
            arcs.append(Arc(*parts[1:]))
        elif line.startswith("rot "):
            head, _, rest = line[4:].partition(":")
            if not _:
                raise DimerError("PARSE_ERROR", f"line {lineno}: expected 'rot <puncture>: <ends>'")
            ends = []
            for token in rest.split():
                match = _END.match(token)
                if not match:
                    raise DimerError("PARSE_ERROR", f"line {lineno}: bad arc-end {token!r}")
                ends.append((match.group(1), match.group(2)))
            rotation[head.strip()] = ends
        else:
            raise DimerError("PARSE_ERROR", f"line {lineno}: cannot parse {line!r}")
    if punctures is None:
        raise DimerError("PARSE_ERROR", "missing 'punctures:' line")
    known = set(punctures)
    for arc in arcs:
        if arc.tail not in known or arc.head not in known:
            raise DimerError("PARSE_ERROR", f"arc {arc.id} uses an unknown puncture")
    if set(rotation) - known:
        raise DimerError("PARSE_ERROR", f"rotation given for unknown puncture {sorted(set(rotation) - known)[0]}")
    return Dimer(punctures, arcs, rotation, name=name)


def serialize_dimer(d):
    lines = [f"punctures: {' '.join(d.punctures)}"]
    lines += [f"arc {a.id} {a.tail} {a.head}" for a in d.arcs]
    for p in d.punctures:
        ends = " ".join(f"{arc}.{kind}" for arc, kind in d.rotation[p])
        lines.append(f"rot {p}: {ends}")
    return "\n".join(lines) + "\n"


def standard_sphere_dimer(m):
    """Sphere with M punctures on a circle: two faces of length M."""
    if m < 3:
        raise DimerError("M_TOO_SMALL", f"standard sphere dimer needs M >= 3, got {m}")
    punctures = [f"p{i}" for i in range(1, m + 1)]
    arcs = [Arc(f"x{i}", f"p{i}", f"p{i % m + 1}") for i in range(1, m + 1)]
    rotation = {
        f"p{i}": [(f"x{i}", "t"), (f"x{(i - 2) % m + 1}", "h")] for i in range(1, m + 1)
    }
    return Dimer(punctures, arcs, rotation, name=f"Q{m}")


def load_dimer(source):
    """Built-in name, ``Q<M>``, path to a dimer file, or inline text."""
    if source in BUILTINS:
        return build_dimer((DATA_DIR / f"{source}.dimer").read_text(), name=source)
    match = re.fullmatch(r"Q(\d+)", source)
    if match:
        return standard_sphere_dimer(int(match.group(1)))
    if "\n" in source or source.lstrip().startswith("punctures:"):
        return build_dimer(source)
    path = Path(source)
    if path.is_file():
        return build_dimer(path.read_text(), name=path.stem)
    raise DimerError("UNKNOWN_BUILTIN", f"{source!r} is neither a built-in dimer nor a readable file")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def zigzag_paths(d):
    return list(d.zigzag_paths)


def euler_characteristic(d):
    return d.euler_characteristic()


def genus(d):
    return d.genus


def face_adjacency_graph(d):
    return d.face_adjacency_graph()


def deck_translation(d, walk):
    return d.deck_translation(walk)


def angles(d, puncture):
    return d.angles(puncture)


@dataclass
class CoverPatch:
    basepoint: tuple
    radius: int
    lifted_faces: dict = field(default_factory=dict)  # (face idx, v) -> distance
    lifted_arcs: set = field(default_factory=set)  # (arc, v), v = lift of the tail
    lifted_punctures: set = field(default_factory=set)  # (puncture, v)
    deck_coordinates: Optional[dict] = None

    def face_count(self):
        return len(self.lifted_faces)


def _face_offsets(d):
    offsets = []
    for face in d.faces:
        acc, offs = d.zero_vector, []
        for arc_id in face.traversal:
            offs.append(acc)
            acc = _vadd(acc, d.omega[arc_id])
        offsets.append(offs)
    return offsets


def corners_at(d, patch, lifted_puncture):
    """Corners (face idx, position) of patch faces at a lifted puncture."""
    offsets = _face_offsets(d)
    p, v = lifted_puncture
    corners = []
    for (idx, anchor) in patch.lifted_faces:
        face = d.faces[idx]
        for pos, arc_id in enumerate(face.traversal):
            if d.tail(arc_id) == p and _vadd(anchor, offsets[idx][pos]) == v:
                corners.append((idx, pos))
    return corners


def develop_cover(d, radius):
    """Lifted faces within ``radius`` face-steps of the basepoint face."""
    if radius < 0:
        raise DimerError("INVALID_RADIUS", "radius must be >= 0")
    offsets = _face_offsets(d)
    base = (0, d.zero_vector)
    patch = CoverPatch(
        basepoint=base,
        radius=radius,
        deck_coordinates=dict(d.omega) if d.genus > 0 else None,
    )
    patch.lifted_faces[base] = 0
    queue = deque([base])
    while queue:
        idx, anchor = queue.popleft()
        dist = patch.lifted_faces[(idx, anchor)]
        face = d.faces[idx]
        other = CCW if face.orientation == CW else CW
        for pos, arc_id in enumerate(face.traversal):
            w = _vadd(anchor, offsets[idx][pos])
            patch.lifted_arcs.add((arc_id, w))
            patch.lifted_punctures.add((d.tail(arc_id), w))
            patch.lifted_punctures.add((d.head(arc_id), _vadd(w, d.omega[arc_id])))
            if dist == radius:
                continue
            nidx, npos = d.face_of(arc_id, other)
            neighbour = (nidx, _vsub(w, offsets[nidx][npos]))
            if neighbour not in patch.lifted_faces:
                patch.lifted_faces[neighbour] = dist + 1
                queue.append(neighbour)
    logger.debug(f"Developed cover of {d.name}: radius {radius}, {patch.face_count()} faces")
    return patch


def _develop_line(d, path, start_idx, depth):
    """Lifted arcs of a zigzag line through step ``start_idx`` at lift 0.

    Returns (forward, backward): forward[0] is the start, backward[k] is k
    steps behind it.
    """
    start = (path.step(start_idx)[0], d.zero_vector)
    forward = [start]
    for k in range(depth):
        arc_id, v = forward[-1]
        forward.append((path.step(start_idx + k + 1)[0], _vadd(v, d.omega[arc_id])))
    backward = [start]
    for k in range(depth):
        _, v = backward[-1]
        prev_arc = path.step(start_idx - k - 1)[0]
        backward.append((prev_arc, _vsub(v, d.omega[prev_arc])))
    return forward, backward


def _line_collision(d, arc_id, depth):
    """First collision among the four zigzag rays starting at ``arc_id``."""
    rays = []
    for turn in (LEFT, RIGHT):
        _, path = d.zigzag_at(arc_id, turn)
        fwd, bwd = _develop_line(d, path, path.index(arc_id, turn), depth)
        rays.append(fwd)
        rays.append(bwd)
    # all four rays share the start
    seen = {rays[0][0]: (0, 0)}
    for ray_idx, ray in enumerate(rays):
        for step, lifted in enumerate(ray[1:], 1):
            if lifted in seen:
                first = seen[lifted]
                return {
                    "arc": arc_id,
                    "rays": [first[0], ray_idx],
                    "steps": [first[1], step],
                    "lifted_arc": [lifted[0], list(lifted[1])],
                }
            seen[lifted] = (ray_idx, step)
    return None


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def check_geometric_consistency(d, depth):
    """Develop the four zigzag rays from every arc and look for collisions.

    Rays are numbered 0/1 (left-turn path forward/backward) and 2/3
    (right-turn path forward/backward).
    """
    if depth < 1:
        raise DimerError("INVALID_DEPTH", "depth must be >= 1")
    max_len = max(len(z) for z in d.zigzag_paths)
    translations = [d.deck_translation(z.arcs) for z in d.zigzag_paths]
    certify = False
    if d.genus == 0:
        # the cover is the surface itself; one period decides
        depth = max(depth, max_len)
    elif d.genus == 1 and all(any(t) for t in translations):
        certify = all(
            _cross(translations[d.zigzag_at(a, LEFT)[0]], translations[d.zigzag_at(a, RIGHT)[0]]) != 0
            for a in d.arc_ids()
        )
        if certify:
            depth = max(depth, 2 * max_len)

    for arc_id in d.arc_ids():
        witness = _line_collision(d, arc_id, depth)
        if witness:
            logger.info(f"✗ {d.name}: zigzag rays from {arc_id} collide")
            return ConsistencyVerdict(status="INCONSISTENT", depth=depth, witness=witness)
    if certify:
        return ConsistencyVerdict(
            status="CONSISTENT_CERTIFIED",
            depth=depth,
            reason="torus: zigzag translations nonzero and pairwise transverse, no collision in two periods",
        )
    return ConsistencyVerdict(status="CONSISTENT_UP_TO_DEPTH", depth=depth)
