"""
Exact sparse linear algebra over the rationals.

Vectors are dicts ``{row key: Fraction}``; a system is a list of such
column vectors. Row keys are mapped to indices on the fly and the work is
done by sympy's sparse ``DomainMatrix`` over ``QQ``.
"""

import logging
from fractions import Fraction

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)


def _to_qq(value):
    return QQ(value.numerator, value.denominator)


def _to_fraction(value):
    return Fraction(int(value.numerator), int(value.denominator))


class ColumnSystem:
    """Columns over a shared, growing set of row keys."""

    def __init__(self, columns=()):
        self.rows = {}
        self.columns = []
        for col in columns:
            self.add(col)

    def _row(self, key):
        if key not in self.rows:
            self.rows[key] = len(self.rows)
        return self.rows[key]

    def add(self, column):
        self.columns.append({self._row(k): v for k, v in column.items() if v})

    def matrix(self, extra=()):
        """DomainMatrix with the stored columns followed by ``extra`` ones."""
        extra = [{self._row(k): v for k, v in col.items() if v} for col in extra]
        cols = self.columns + extra
        data = {}
        for j, col in enumerate(cols):
            for i, v in col.items():
                data.setdefault(i, {})[j] = _to_qq(Fraction(v))
        shape = (max(len(self.rows), 1), len(cols))
        return DomainMatrix(data, shape, QQ)


def rref_pivots(matrix):
    reduced, pivots = matrix.rref()
    return reduced, tuple(pivots)


def solve(system, target):
    """Coefficients c with Σ c_j column_j = target, or None if inconsistent.

    Free variables are set to zero.
    """
    if not any(target.values()):
        return {}
    matrix = system.matrix(extra=[target])
    n = len(system.columns)
    reduced, pivots = rref_pivots(matrix)
    if n in pivots:
        return None
    entries = reduced.to_sparse().rep
    solution = {}
    for row, col in enumerate(pivots):
        value = entries.get(row, {}).get(n)
        if value:
            solution[col] = _to_fraction(value)
    return solution


def nullspace(system, keep_row):
    """Basis of {c : the rows selected by ``keep_row`` of A·c vanish}."""
    projected = ColumnSystem()
    for key in system.rows:
        if keep_row(key):
            projected._row(key)
    inverse = {i: k for k, i in system.rows.items()}
    for col in system.columns:
        projected.add({inverse[i]: v for i, v in col.items() if keep_row(inverse[i])})
    if not projected.rows:
        return [{j: Fraction(1)} for j in range(len(system.columns))]
    basis = projected.matrix().nullspace().to_sparse().rep
    return [{j: _to_fraction(v) for j, v in row.items()} for _, row in sorted(basis.items())]


def combine(system, coefficients):
    """Σ c_j column_j as a dict keyed by the original row keys."""
    inverse = {i: k for k, i in system.rows.items()}
    out = {}
    for j, c in coefficients.items():
        for i, v in system.columns[j].items():
            out[inverse[i]] = out.get(inverse[i], Fraction(0)) + c * v
    return {k: v for k, v in out.items() if v}
