"""Exact nullspaces over the field of parameter expressions.

Rows are sparse ``{column: JetExpr}`` maps whose entries involve parameters
only.  Elimination first uses single-term pivots, which are invertible in
the Laurent representation of the kernel; whatever is left (rows whose
entries are all sums) goes to sympy's fraction-field matrices.  Returned
basis vectors are cleared of denominators, so their entries are again
kernel expressions.
"""

from __future__ import annotations

from functools import reduce as _fold

import sympy
from gmpy2 import mpq
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .kernel import PARAMS, JetExpr, to_rational

_SYMS = sympy.symbols(PARAMS)


def _row_reduce(row: dict, pivots: dict) -> dict:
    for pc, prow in pivots.items():
        a = row.get(pc)
        if a is None:
            continue
        factor = a / prow[pc]
        for col, v in prow.items():
            new = row.get(col, JetExpr()) - factor * v
            if new.is_zero():
                row.pop(col, None)
            else:
                row[col] = new
    return row


def _single_term_col(row: dict):
    for col in sorted(row):
        if len(row[col]) == 1:
            return col
    return None


def _to_sympy(e: JetExpr):
    total = sympy.Integer(0)
    for m, c in e.terms.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for a, k in m:
            term *= _SYMS[a[1]] ** int(k)
        total += term
    return total


def _from_sympy_poly(expr) -> JetExpr:
    expr = sympy.expand(expr)
    if expr == 0:
        return JetExpr()
    poly = sympy.Poly(expr, *_SYMS)
    terms = {}
    for exps, coeff in poly.terms():
        mono = tuple(((0, i), int(e)) for i, e in enumerate(exps) if e)
        terms[mono] = mpq(int(sympy.fraction(coeff)[0]), int(sympy.fraction(coeff)[1]))
    return JetExpr(terms)


def _hard_nullspace(rows: list, cols: list) -> list:
    index = {c: i for i, c in enumerate(cols)}
    dense = [[sympy.Integer(0)] * len(cols) for _ in rows]
    for r, row in enumerate(rows):
        for col, v in row.items():
            dense[r][index[col]] = _to_sympy(v)
    field = QQ.frac_field(*_SYMS)
    dm = DomainMatrix.from_list_sympy(len(rows), len(cols), dense).convert_to(field)
    basis = []
    for vec in dm.nullspace().to_Matrix().tolist():
        vec = [sympy.cancel(v) for v in vec]
        dens = [sympy.fraction(v)[1] for v in vec]
        lcm = _fold(sympy.lcm, dens, sympy.Integer(1))
        vec = [sympy.cancel(v * lcm) for v in vec]
        basis.append({cols[i]: _from_sympy_poly(v) for i, v in enumerate(vec) if v != 0})
    return basis


def nullspace(rows, ncols: int) -> list[list[JetExpr]]:
    """Basis of ``{z : sum_col row[col] * z[col] = 0 for every row}``."""
    pivots: dict = {}
    hard: list = []
    pending = [dict(r) for r in rows if r]
    while pending:
        row = _row_reduce(pending.pop(), pivots)
        if not row:
            continue
        col = _single_term_col(row)
        if col is None:
            hard.append(row)
            continue
        for prow in pivots.values():
            _row_reduce(prow, {col: row})
        pivots[col] = row
        # earlier hard rows may now have simpler entries
        pending.extend(hard)
        hard = []
    free_cols = [c for c in range(ncols) if c not in pivots]
    hard = [r for r in (_row_reduce(r, pivots) for r in hard) if r]
    if hard:
        hard_cols = sorted({c for r in hard for c in r})
        free_vecs = _hard_nullspace(hard, hard_cols)
        for c in free_cols:
            if c not in hard_cols:
                free_vecs.append({c: JetExpr.const(1)})
    else:
        free_vecs = [{c: JetExpr.const(1)} for c in free_cols]
    basis = []
    for z in free_vecs:
        vec = [JetExpr() for _ in range(ncols)]
        for c, v in z.items():
            vec[c] = v
        for pc, prow in pivots.items():
            acc = JetExpr()
            for col, a in prow.items():
                if col != pc and col in z:
                    acc = acc + a * z[col]
            vec[pc] = -acc / prow[pc] if not acc.is_zero() else JetExpr()
        basis.append(vec)
    return basis


def in_span(basis: list, target: list) -> bool:
    """True when ``target`` is a combination of the ``basis`` vectors."""
    n = len(basis)
    target = [t if isinstance(t, JetExpr) else JetExpr.const(to_rational(t)) for t in target]
    rows = []
    for i, t in enumerate(target):
        row = {j: basis[j][i] for j in range(n) if not basis[j][i].is_zero()}
        if not t.is_zero():
            row[n] = t
        if row:
            rows.append(row)
    # a dependency with a nonzero weight on the target column puts it in the span
    return any(not vec[n].is_zero() for vec in nullspace(rows, n + 1))


def rank(vectors: list) -> int:
    if not vectors:
        return 0
    dim = len(vectors[0])
    rows = []
    for i in range(dim):
        row = {j: v[i] for j, v in enumerate(vectors) if not v[i].is_zero()}
        if row:
            rows.append(row)
    return len(vectors) - len(nullspace(rows, len(vectors)))
