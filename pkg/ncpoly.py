"""
Exact arithmetic in path algebras with truncated power-series coefficients.

- DefSeries: truncated multivariate power series over the rationals, one
  variable per puncture, truncated by total degree.
- Quiver / Path: paths are written right to left; the word ``x1 ... xn`` is
  a path iff ``tail(xi) == head(xi+1)``.
- NCPoly: finite combinations of paths with DefSeries coefficients.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

from errors import NCPolyError


# ---------------------------------------------------------------------------
# Monomials and truncated series
# ---------------------------------------------------------------------------

def mono_mul(m1, m2):
    return tuple(sorted(m1 + m2))


def mono_str(mono):
    parts = []
    for var in sorted(set(mono)):
        power = mono.count(var)
        parts.append(var if power == 1 else f"{var}^{power}")
    return "*".join(parts)


def mono_key(mono):
    return (len(mono), mono)


def _fmt_coeff(c):
    sign = "+" if c > 0 else "-"
    c = abs(c)
    return f"{sign}{c.numerator}" if c.denominator == 1 else f"{sign}{c.numerator}/{c.denominator}"


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"unsupported scalar {value!r}")


class DefSeries:
    """Truncated power series in the deformation variables.

    ``order`` is the truncation bound N: monomials of total degree > N are
    never stored. Coefficients are Fractions; zeros are dropped.
    """

    __slots__ = ("_terms", "order")

    def __init__(self, terms=None, order=0):
        self.order = order
        clean = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(sorted(mono))
            if len(mono) > order:
                continue
            coeff = _as_fraction(coeff)
            if coeff:
                clean[mono] = clean.get(mono, Fraction(0)) + coeff
        self._terms = {m: c for m, c in clean.items() if c}

    @classmethod
    def constant(cls, value, order=0):
        return cls({(): value}, order)

    @classmethod
    def one(cls, order=0):
        return cls.constant(1, order)

    @classmethod
    def zero(cls, order=0):
        return cls({}, order)

    @classmethod
    def monomial(cls, mono, coeff=1, order=0):
        return cls({tuple(mono): coeff}, order)

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: mono_key(kv[0]))

    def is_zero(self):
        return not self._terms

    def valuation(self):
        """Lowest total degree present (None for zero)."""
        return min((len(m) for m in self._terms), default=None)

    def constant_term(self):
        return self._terms.get((), Fraction(0))

    def at_zero(self):
        return DefSeries.constant(self.constant_term(), self.order)

    def truncate(self, order):
        return DefSeries(self._terms, min(order, self.order))

    def with_order(self, order):
        return DefSeries(self._terms, order)

    def _coerce(self, other):
        if isinstance(other, DefSeries):
            return other
        return DefSeries.constant(_as_fraction(other), self.order)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for mono, coeff in other._terms.items():
            terms[mono] = terms.get(mono, Fraction(0)) + coeff
        return DefSeries(terms, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return DefSeries({m: -c for m, c in self._terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, DefSeries):
            factor = _as_fraction(other)
            return DefSeries({m: c * factor for m, c in self._terms.items()}, self.order)
        order = min(self.order, other.order)
        terms = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                if len(m1) + len(m2) > order:
                    continue
                mono = mono_mul(m1, m2)
                terms[mono] = terms.get(mono, Fraction(0)) + c1 * c2
        return DefSeries(terms, order)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DefSeries.constant(other, self.order)
        if not isinstance(other, DefSeries):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def serialize(self):
        if not self._terms:
            return "0"
        parts = []
        for mono, coeff in self.items():
            parts.append(_fmt_coeff(coeff) + (f"*{mono_str(mono)}" if mono else ""))
        return " ".join(parts)

    def __repr__(self):
        return f"DefSeries({self.serialize()}; N={self.order})"


_SERIES_TERM = re.compile(r"([+-])\s*(\d+)(?:/(\d+))?((?:\*[A-Za-z_]\w*(?:\^\d+)?)*)")


def _parse_monomial(text):
    mono = []
    for factor in filter(None, text.split("*")):
        name, _, power = factor.partition("^")
        mono.extend([name] * (int(power) if power else 1))
    return tuple(sorted(mono))


def parse_series(text, order=0):
    """Inverse of DefSeries.serialize."""
    text = text.strip()
    if text in ("", "0"):
        return DefSeries.zero(order)
    if text[0] not in "+-":
        text = "+" + text
    terms = {}
    consumed = 0
    for match in _SERIES_TERM.finditer(text):
        if text[consumed:match.start()].strip():
            raise NCPolyError("PARSE_ERROR", f"cannot parse series {text!r}")
        consumed = match.end()
        sign, num, den, mono_text = match.groups()
        coeff = Fraction(int(num), int(den) if den else 1) * (1 if sign == "+" else -1)
        mono = _parse_monomial(mono_text)
        terms[mono] = terms.get(mono, Fraction(0)) + coeff
    if text[consumed:].strip():
        raise NCPolyError("PARSE_ERROR", f"cannot parse series {text!r}")
    return DefSeries(terms, order)


# ---------------------------------------------------------------------------
# Quivers and paths
# ---------------------------------------------------------------------------

class Path(NamedTuple):
    arcs: tuple
    source: str
    target: str

    def __len__(self):
        return len(self.arcs)

    @property
    def is_cycle(self):
        return self.source == self.target

    def sort_key(self):
        return (len(self.arcs), self.arcs, self.source)

    def word(self):
        return " ".join(self.arcs) if self.arcs else f"@{self.source}"


@dataclass(frozen=True)
class Quiver:
    vertices: tuple
    arcs: tuple  # (arc id, tail, head)

    @cached_property
    def _ends(self):
        return {arc: (tail, head) for arc, tail, head in self.arcs}

    def tail(self, arc):
        return self._ends[arc][0]

    def head(self, arc):
        return self._ends[arc][1]

    def arc_ids(self):
        return [arc for arc, _, _ in self.arcs]

    def has_arc(self, arc):
        return arc in self._ends

    def is_path(self, word):
        word = tuple(word)
        if any(a not in self._ends for a in word):
            return False
        return all(self.tail(word[i]) == self.head(word[i + 1]) for i in range(len(word) - 1))

    def path(self, word):
        word = tuple(word)
        if not word:
            raise NCPolyError("NOT_COMPOSABLE", "empty word needs an explicit vertex")
        if not self.is_path(word):
            raise NCPolyError("NOT_COMPOSABLE", f"{' '.join(word)} is not a path")
        return Path(word, self.tail(word[-1]), self.head(word[0]))

    def idempotent(self, vertex):
        if vertex not in self.vertices:
            raise NCPolyError("NOT_COMPOSABLE", f"unknown vertex {vertex}")
        return Path((), vertex, vertex)

    def compose(self, left, right):
        """Written product left·right, or None when not composable."""
        if left.source != right.target:
            return None
        return Path(left.arcs + right.arcs, right.source, left.target)

    def out_arcs(self, vertex):
        """Arcs whose tail is ``vertex`` (they extend a path on the left)."""
        return [arc for arc, tail, _ in self.arcs if tail == vertex]

    def in_arcs(self, vertex):
        return [arc for arc, _, head in self.arcs if head == vertex]


def _as_series(value, order):
    if isinstance(value, DefSeries):
        return value
    return DefSeries.constant(_as_fraction(value), order)


# ---------------------------------------------------------------------------
# Path-algebra elements
# ---------------------------------------------------------------------------

class NCPoly:
    """Combination of paths of one quiver with DefSeries coefficients."""

    __slots__ = ("quiver", "order", "_terms")

    def __init__(self, quiver, terms=None, order=0):
        self.quiver = quiver
        self.order = order
        clean = {}
        for path, coeff in (terms or {}).items():
            coeff = _as_series(coeff, order).truncate(order)
            if path in clean:
                coeff = clean[path] + coeff
            clean[path] = coeff
        self._terms = {p: c for p, c in clean.items() if not c.is_zero()}

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, quiver, order=0):
        return cls(quiver, {}, order)

    @classmethod
    def from_word(cls, quiver, word, coeff=1, order=0):
        if isinstance(word, str):
            word = word.split()
        return cls(quiver, {quiver.path(word): coeff}, order)

    @classmethod
    def from_path(cls, quiver, path, coeff=1, order=0):
        return cls(quiver, {path: coeff}, order)

    @classmethod
    def idempotent(cls, quiver, vertex, coeff=1, order=0):
        return cls(quiver, {quiver.idempotent(vertex): coeff}, order)

    @classmethod
    def unit(cls, quiver, order=0):
        return cls(quiver, {quiver.idempotent(v): 1 for v in quiver.vertices}, order)

    # access -------------------------------------------------------------

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def paths(self):
        return sorted(self._terms, key=Path.sort_key)

    def coefficient(self, path):
        if isinstance(path, str):
            path = self.quiver.path(path.split())
        elif isinstance(path, tuple) and not isinstance(path, Path):
            path = self.quiver.path(path)
        return self._terms.get(path, DefSeries.zero(self.order))

    def is_zero(self):
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def max_length(self):
        return max((len(p) for p in self._terms), default=0)

    def lengths(self):
        return {len(p) for p in self._terms}

    def endpoints(self):
        return {(p.source, p.target) for p in self._terms}

    def is_uniform(self):
        return len(self.endpoints()) <= 1

    def restrict(self, source=None, target=None):
        """e_target · self · e_source."""
        return NCPoly(
            self.quiver,
            {p: c for p, c in self._terms.items()
             if (source is None or p.source == source) and (target is None or p.target == target)},
            self.order,
        )

    def map_coefficients(self, fn):
        return NCPoly(self.quiver, {p: fn(c) for p, c in self._terms.items()}, self.order)

    def truncate(self, order):
        return NCPoly(self.quiver, self._terms, min(order, self.order))

    def with_order(self, order):
        return NCPoly(self.quiver, {p: c.with_order(order) for p, c in self._terms.items()}, order)

    def at_zero(self):
        """Specialization q = 0."""
        return self.map_coefficients(DefSeries.at_zero)

    # arithmetic ---------------------------------------------------------

    def _check(self, other):
        if other.quiver != self.quiver:
            raise NCPolyError("QUIVER_MISMATCH", "operands live on different quivers")

    def __add__(self, other):
        self._check(other)
        terms = dict(self._terms)
        for path, coeff in other._terms.items():
            terms[path] = terms[path] + coeff if path in terms else coeff
        return NCPoly(self.quiver, terms, min(self.order, other.order))

    def __neg__(self):
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return NCPoly(self.quiver, {p: c * factor for p, c in self._terms.items()}, self.order)

    def __mul__(self, other):
        if isinstance(other, NCPoly):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.quiver == other.quiver and self._terms == other._terms

    __hash__ = None

    # text -------------------------------------------------------------------

    def flat_terms(self):
        """(monomial, path, coefficient) triples in serialization order."""
        flat = [(mono, path, coeff)
                for path, series in self._terms.items()
                for mono, coeff in series.terms.items()]
        flat.sort(key=lambda t: (len(t[0]), t[0], len(t[1].arcs), t[1].arcs, t[1].source))
        return flat

    def serialize(self):
        if not self._terms:
            return "0"
        parts = []
        for mono, path, coeff in self.flat_terms():
            mono_part = f"*{mono_str(mono)}" if mono else ""
            parts.append(f"{_fmt_coeff(coeff)}{mono_part}*[{path.word()}]")
        return " ".join(parts)

    def __repr__(self):
        return f"NCPoly({self.serialize()})"


def mul(x, y):
    """Bilinear concatenation product; non-composable pairs vanish."""
    if x.quiver != y.quiver:
        raise NCPolyError("QUIVER_MISMATCH", "operands live on different quivers")
    order = min(x.order, y.order)
    terms = {}
    for p, cp in x._terms.items():
        for r, cr in y._terms.items():
            path = x.quiver.compose(p, r)
            if path is None:
                continue
            coeff = cp * cr
            if coeff.is_zero():
                continue
            terms[path] = terms[path] + coeff if path in terms else coeff
    return NCPoly(x.quiver, terms, order)


def truncate(x, order):
    return x.truncate(order)


def rotate_word(word, k=1):
    k %= len(word)
    return word[k:] + word[:k]


def cyc(quiver, word, order=0):
    """Sum of all |p| cyclic rotations of the cycle p."""
    if isinstance(word, str):
        word = word.split()
    word = tuple(word)
    if not word or not quiver.is_path(word) or quiver.tail(word[-1]) != quiver.head(word[0]):
        raise NCPolyError("NOT_A_CYCLE", f"{' '.join(word)} is not a cycle")
    terms = {}
    for k in range(len(word)):
        path = quiver.path(rotate_word(word, k))
        terms[path] = terms.get(path, 0) + 1
    return NCPoly(quiver, terms, order)


def is_cyclic(x):
    for path, coeff in x._terms.items():
        if not path.is_cycle:
            return False
        if not path.arcs:
            continue
        rotated = x.quiver.path(rotate_word(path.arcs))
        if x.coefficient(rotated) != coeff:
            return False
    return True


def cyclic_derivative(w, arc):
    """Strip ``arc`` from the front of every term that starts with it."""
    if not is_cyclic(w):
        raise NCPolyError("NOT_CYCLIC", "cyclic derivative of a non-cyclic element")
    quiver = w.quiver
    terms = {}
    for path, coeff in w._terms.items():
        if not path.arcs or path.arcs[0] != arc:
            continue
        rest = path.arcs[1:]
        remainder = quiver.path(rest) if rest else quiver.idempotent(quiver.tail(arc))
        terms[remainder] = terms[remainder] + coeff if remainder in terms else coeff
    return NCPoly(quiver, terms, w.order)


_POLY_TERM = re.compile(
    r"([+-])\s*(\d+)(?:/(\d+))?((?:\*[A-Za-z_]\w*(?:\^\d+)?)*)\*\[([^\]]*)\]"
)


def parse_ncpoly(text, quiver, order=0):
    """Inverse of NCPoly.serialize; terms may be separated by spaces or ';'."""
    text = text.replace(";", " ").strip()
    if text in ("", "0"):
        return NCPoly.zero(quiver, order)
    if text[0] not in "+-":
        text = "+" + text
    terms = {}
    consumed = 0
    for match in _POLY_TERM.finditer(text):
        if text[consumed:match.start()].strip():
            raise NCPolyError("PARSE_ERROR", f"cannot parse {text[consumed:match.start()]!r}")
        consumed = match.end()
        sign, num, den, mono_text, word = match.groups()
        coeff = Fraction(int(num), int(den) if den else 1) * (1 if sign == "+" else -1)
        word = word.strip()
        if word.startswith("@"):
            path = quiver.idempotent(word[1:])
        elif not word:
            if len(quiver.vertices) != 1:
                raise NCPolyError("PARSE_ERROR", "bare [] needs a one-vertex quiver")
            path = quiver.idempotent(quiver.vertices[0])
        else:
            path = quiver.path(word.split())
        series = DefSeries.monomial(_parse_monomial(mono_text), coeff, order)
        terms[path] = terms[path] + series if path in terms else series
    if text[consumed:].strip():
        raise NCPolyError("PARSE_ERROR", f"cannot parse {text[consumed:]!r}")
    return NCPoly(quiver, terms, order)
