"""
The Cho-Hong-Lau construction over finite product tables.

A product table lists, for words of odd inputs X_e (written e_k … e_1,
like paths), the output of μ_q as a combination of the dual elements Y_e
and the identities id_Li. Module entries list μ_q(m, X…) for the basis
m_a, m*_a of the reference module at an arc. From such a table we read
off the quiver, W_q, the relations, ℓ_q and the mirror factorizations.

Text format::

    objects: L1 L2
    odd: a L1 L2
    arity_cap: 4
    q_order: 2
    mu: X_a X_b -> (+1)*Y_c + (-1*qa)*id_L1
    mod m_a: X_b -> (+1)*m*_a
"""

import logging
import re
from dataclasses import dataclass, field

from backend.models import CHLVerdict, GrowthRow
from errors import CHLError
from jacobi import RelationSystem
from mirror import MatrixFactorization
from ncpoly import DefSeries, NCPoly, Quiver, cyclic_derivative, parse_series, rotate_word

logger = logging.getLogger(__name__)


@dataclass
class ProductTable:
    objects: tuple
    odd_basis: tuple  # ((label, source object, target object), ...)
    entries: dict = field(default_factory=dict)  # word -> {"Y_e" | "id_Li" | "id*_Li": DefSeries}
    module_entries: dict = field(default_factory=dict)  # (m, word) -> {m': DefSeries}
    arity_cap: int = 0
    q_order: int = 0

    def quiver(self):
        return Quiver(tuple(self.objects), tuple(tuple(x) for x in self.odd_basis))

    def validate(self):
        quiver = self.quiver()
        for word in list(self.entries) + [w for _, w in self.module_entries]:
            if word and not quiver.is_path(word):
                raise CHLError("NON_COMPOSABLE", f"stored word {' '.join(word)} is not composable")
        return self

    def at_zero(self):
        """The classical table: q-free parts of every entry."""
        def strip(out):
            out = {label: c.at_zero() for label, c in out.items()}
            return {label: c for label, c in out.items() if not c.is_zero()}

        return ProductTable(
            self.objects,
            self.odd_basis,
            {w: strip(out) for w, out in self.entries.items() if strip(out)},
            {k: strip(out) for k, out in self.module_entries.items() if strip(out)},
            self.arity_cap,
            0,
        )

    def coefficient(self, word, label):
        return self.entries.get(tuple(word), {}).get(label, DefSeries.zero(self.q_order))


def chl_quiver(t):
    return t.validate().quiver()


def _path_or_unit(quiver, word, vertex):
    return quiver.path(word) if word else quiver.idempotent(vertex)


def check_cyclicity(t):
    """Pairing check ⟨μ(e_k … e_1), X_e⟩ against the rotated word."""
    for word, out in sorted(t.entries.items()):
        for label, coeff in out.items():
            if not label.startswith("Y_"):
                continue
            full = (label[2:],) + word
            rotated = rotate_word(full, 1)
            other = t.coefficient(rotated[1:], f"Y_{rotated[0]}")
            if other != coeff:
                return CHLVerdict(status="CYCLICITY_VIOLATION", witness={
                    "word": " ".join(full),
                    "coefficient": coeff.serialize(),
                    "rotated": " ".join(rotated),
                    "rotated_coefficient": other.serialize(),
                })
    return CHLVerdict(status="OK")


def chl_superpotential(t):
    """W_q = ⟨Σ μ_q(b, …, b), b⟩ with b = Σ x_e X_e."""
    verdict = check_cyclicity(t)
    if verdict.status != "OK":
        raise CHLError("CYCLICITY_VIOLATION", "product table is not cyclic", witness=verdict.witness)
    quiver = chl_quiver(t)
    terms = {}
    for word, out in t.entries.items():
        for label, coeff in out.items():
            if label.startswith("Y_"):
                path = quiver.path((label[2:],) + word)
                terms[path] = terms[path] + coeff if path in terms else coeff
    return NCPoly(quiver, terms, t.q_order)


def chl_relations_and_potential(t):
    """(R_{q,e} per arrow, ℓ_q), with R_{q,e} = ∂_e W_q checked exactly."""
    quiver = chl_quiver(t)
    relations = {e: {} for e, _, _ in quiver.arcs}
    ell = {}
    for word, out in t.entries.items():
        for label, coeff in out.items():
            if label.startswith("Y_"):
                arc = label[2:]
                path = _path_or_unit(quiver, word, quiver.tail(arc))
                slot = relations[arc]
            elif label.startswith("id_"):
                path = _path_or_unit(quiver, word, label[3:])
                slot = ell
            else:
                continue
            slot[path] = slot[path] + coeff if path in slot else coeff
    relations = {e: NCPoly(quiver, terms, t.q_order) for e, terms in relations.items()}
    ell = NCPoly(quiver, ell, t.q_order)

    w = chl_superpotential(t)
    for arc, rel in relations.items():
        derivative = cyclic_derivative(w, arc)
        if derivative != rel:
            raise CHLError("RELATION_MISMATCH", f"R_{arc} differs from the cyclic derivative of W_q", witness={
                "arc": arc,
                "relation": rel.serialize(),
                "derivative": derivative.serialize(),
            })
    return relations, ell


def _classical_system(relations):
    basis = [r.at_zero() for r in relations.values() if not r.at_zero().is_zero()]
    return RelationSystem.from_basis(basis) if basis else None


def chl_mirror_object(t, arc, length_cap=None):
    """δ on the reference module at ``arc`` and its curvature ℓ_q·id − δ²."""
    quiver = chl_quiver(t)
    if not quiver.has_arc(arc):
        raise CHLError("NOT_AN_ARC", f"{arc} is not an arrow of the table")
    head, tail = quiver.head(arc), quiver.tail(arc)
    f, g = {}, {}
    for (m, word), out in t.module_entries.items():
        for label, coeff in out.items():
            if m == f"m*_{arc}" and label == f"m_{arc}":
                # single-input functor sign on the even generator
                f[_path_or_unit(quiver, word, head)] = -coeff
            elif m == f"m_{arc}" and label == f"m*_{arc}":
                g[_path_or_unit(quiver, word, tail)] = coeff
    f = NCPoly(quiver, f, t.q_order)
    g = NCPoly(quiver, g, t.q_order)

    relations, ell = chl_relations_and_potential(t)
    system = _classical_system(relations)
    m = MatrixFactorization.build(arc, head, tail, f, g, ell, system, length_cap)
    for block in (m.curvature_even, m.curvature_odd):
        if not block.at_zero().is_zero():
            raise CHLError(
                "CURVATURE_NOT_INFINITESIMAL",
                f"δ² − ℓ_q on the module at {arc} has a q-free part",
                witness=block.at_zero().serialize(),
            )
    return m


def slow_growth_audit(t):
    """Entry count and lowest q-order of the outputs, per arity."""
    rows = {}
    for word, out in t.entries.items():
        row = rows.setdefault(len(word), GrowthRow(arity=len(word), entries=0))
        for coeff in out.values():
            row.entries += 1
            v = coeff.valuation()
            if v is not None and (row.min_q_order is None or v < row.min_q_order):
                row.min_q_order = v
    return [rows[k] for k in sorted(rows)]


def growth_threshold(rows):
    """Smallest arity from which the lowest q-order never decreases."""
    orders = [(r.arity, r.min_q_order or 0) for r in rows]
    for i, (arity, _) in enumerate(orders):
        tail = [o for _, o in orders[i:]]
        if all(a <= b for a, b in zip(tail, tail[1:])):
            return arity
    return None


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def _format_output(out):
    if not out:
        return "0"
    return " + ".join(f"({c.serialize()})*{label}" for label, c in sorted(out.items()))


def _entry_line(key, word, out):
    inputs = " ".join(f"X_{e}" for e in word)
    return f"{key}: {inputs} -> {_format_output(out)}" if inputs else f"{key}: -> {_format_output(out)}"


def serialize_product_table(t):
    lines = [
        f"objects: {' '.join(t.objects)}",
        *(f"odd: {e} {s} {h}" for e, s, h in t.odd_basis),
        f"arity_cap: {t.arity_cap}",
        f"q_order: {t.q_order}",
    ]
    for word in sorted(t.entries, key=lambda w: (len(w), w)):
        lines.append(_entry_line("mu", word, t.entries[word]))
    for m, word in sorted(t.module_entries, key=lambda k: (k[0], len(k[1]), k[1])):
        lines.append(_entry_line(f"mod {m}", word, t.module_entries[(m, word)]))
    return "\n".join(lines) + "\n"


_OUTPUT = re.compile(r"\(([^)]*)\)\*(\S+)")


def _parse_output(text, order):
    out = {}
    text = text.strip()
    if text == "0":
        return out
    consumed = 0
    for match in _OUTPUT.finditer(text):
        if text[consumed:match.start()].strip() not in ("", "+"):
            raise CHLError("PARSE_ERROR", f"cannot parse output {text!r}")
        consumed = match.end()
        out[match.group(2)] = parse_series(match.group(1), order)
    if text[consumed:].strip():
        raise CHLError("PARSE_ERROR", f"cannot parse output {text!r}")
    return out


def _parse_word(text):
    word = []
    for token in text.split():
        if not token.startswith("X_"):
            raise CHLError("PARSE_ERROR", f"expected an odd input X_e, got {token!r}")
        word.append(token[2:])
    return tuple(word)


def parse_product_table(text):
    objects, odd, arity_cap, q_order = (), [], 0, 0
    raw_entries, raw_modules = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise CHLError("PARSE_ERROR", f"line {lineno}: missing ':'")
        if head == "objects":
            objects = tuple(rest.split())
        elif head == "odd":
            parts = rest.split()
            if len(parts) != 3:
                raise CHLError("PARSE_ERROR", f"line {lineno}: odd needs label, source and target")
            odd.append(tuple(parts))
        elif head == "arity_cap":
            arity_cap = int(rest)
        elif head == "q_order":
            q_order = int(rest)
        elif head == "mu" or head.startswith("mod "):
            word, arrow, output = rest.partition("->")
            if not arrow:
                raise CHLError("PARSE_ERROR", f"line {lineno}: missing '->'")
            target = raw_entries if head == "mu" else raw_modules
            target.append((head[4:].strip(), word, output))
        else:
            raise CHLError("PARSE_ERROR", f"line {lineno}: unknown key {head!r}")
    table = ProductTable(objects, tuple(odd), arity_cap=arity_cap, q_order=q_order)
    for _, word, output in raw_entries:
        table.entries[_parse_word(word)] = _parse_output(output, q_order)
    for m, word, output in raw_modules:
        table.module_entries[(m, _parse_word(word))] = _parse_output(output, q_order)
    return table.validate()
