"""Exact expressions on jet space.

An expression is a finite sum of monomials with exact rational coefficients.
A monomial is a sorted tuple of ``(atom, exponent)`` pairs.  Atoms are plain
tuples, which keeps hashing and ordering cheap:

    (0, i)                    parameter ``PARAMS[i]``; integer exponent, may be negative
    (1, i)                    independent variable ``t`` (i=0) or ``x`` (i=1)
    (2, d, i, j)              jet coordinate of ``DEPVARS[d]`` with i t- and j x-derivatives
    (3, b, k, arg)            ``FUNCS[b]`` differentiated k times, at the expression keyed ``arg``
    (4, coord, scale, shift)  base power ``(scale*coord + shift)**e`` with rational e

``scale`` and ``shift`` are keys of parameter-only expressions.  Rational
coefficients in the parameters are therefore Laurent polynomials: division is
allowed by parameter monomials (``beta``, ``c**2``) but not by sums.

Canonical form rules for base powers, which make the zero test syntactic:

* the exponent of a base atom is never a non-negative integer (those are
  expanded into polynomials in ``coord``);
* a monomial holding a base atom on ``coord`` never holds ``coord`` itself
  (it is absorbed through ``coord = (s - shift)/scale``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Mapping

from gmpy2 import mpq

PARAMS = ("beta", "c", "k", "q", "p0", "kappa", "nu", "n", "mu", "sigma", "v0")
INDEPS = ("t", "x")
DEPVARS = ("p", "u", "v", "w")
FUNCS = ("f", "h")

PARAM, INDEP, JET, FUNC, BASE = range(5)

_PARAM_INDEX = {name: i for i, name in enumerate(PARAMS)}
_DEPVAR_INDEX = {name: i for i, name in enumerate(DEPVARS)}
_FUNC_INDEX = {name: i for i, name in enumerate(FUNCS)}

ONE = mpq(1)
ZERO = mpq(0)


class ExprError(ValueError):
    pass


class DivisionError(ExprError):
    """Division by something that is not an invertible monomial."""


class CyclicBindingError(ExprError):
    pass


class UnassignedSymbolError(ExprError, KeyError):
    pass


class NonConcreteFunctionError(ExprError):
    pass


def to_rational(value) -> mpq:
    if isinstance(value, float):
        return mpq(value)
    return mpq(value)


# ---------------------------------------------------------------- monomials


def _has_base(m) -> bool:
    # base atoms sort last because their kind tag is the largest
    return bool(m) and m[-1][0][0] == BASE


def _is_nonneg_int(e) -> bool:
    return e >= 0 and int(e) == e


def _mono_mul(m1, m2):
    """Product of two canonical monomials as ``((mono, coeff), ...)``."""
    if not m1:
        return ((m2, ONE),)
    if not m2:
        return ((m1, ONE),)
    d = dict(m1)
    for a, e in m2:
        s = d.get(a, 0) + e
        if s == 0:
            d.pop(a, None)
        else:
            d[a] = s
    if _has_base(m1) or _has_base(m2):
        return tuple(_canon(d).items())
    return ((tuple(sorted(d.items())), ONE),)


def _canon(d) -> dict:
    """Canonical terms for a raw ``atom -> exponent`` mapping."""
    for a, e in d.items():
        if a[0] != BASE:
            continue
        coord = a[1]
        if _is_nonneg_int(e):
            rest = dict(d)
            del rest[a]
            return _mul_terms(_canon(rest), _pow_terms(_base_linear(a), int(e)))
        m = d.get(coord, 0)
        if m:
            rest = dict(d)
            del rest[coord]
            del rest[a]
            scale, shift = dict(a[2]), dict(a[3])
            inv = _const_pow(scale, -m)
            neg_shift = _scale_terms(shift, -ONE)
            out: dict = {}
            for j in range(m + 1):
                const = _mul_terms(inv, _pow_terms(neg_shift, m - j))
                if not const:
                    continue
                const = _scale_terms(const, mpq(comb(m, j)))
                md = dict(rest)
                ej = e + j
                if ej != 0:
                    md[a] = ej
                _add_into(out, _mul_terms(const, _canon(md)))
            return out
    return {tuple(sorted(d.items())): ONE}


def _base_linear(atom) -> dict:
    """Terms of ``scale*coord + shift`` for a base atom."""
    _, coord, scale, shift = atom
    out = _mul_terms(dict(scale), {((coord, 1),): ONE})
    _add_into(out, dict(shift))
    return out


# ---------------------------------------------------------------- term dicts


def _add_into(acc: dict, terms: Mapping, factor=ONE) -> dict:
    for m, c in terms.items():
        v = acc.get(m, ZERO) + c * factor
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)
    return acc


def _scale_terms(terms: Mapping, factor) -> dict:
    if not factor:
        return {}
    return {m: c * factor for m, c in terms.items()}


def _mul_terms(a: Mapping, b: Mapping) -> dict:
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            c = c1 * c2
            for m, k in _mono_mul(m1, m2):
                v = out.get(m, ZERO) + c * k
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
    return out


def _pow_terms(terms: Mapping, n: int) -> dict:
    result: dict = {(): ONE}
    base = dict(terms)
    while n:
        if n & 1:
            result = _mul_terms(result, base)
        n >>= 1
        if n:
            base = _mul_terms(base, base)
    return result


def _const_pow(terms: Mapping, n: int) -> dict:
    """Integer power of a constant; negative powers need a single term."""
    if n >= 0:
        return _pow_terms(terms, n)
    if len(terms) != 1:
        raise DivisionError("cannot invert a sum of parameter terms")
    (m, c), = terms.items()
    return {tuple((a, e * n) for a, e in m): c ** n}


def _mono_inverse(m) -> tuple:
    for a, _ in m:
        if a[0] not in (PARAM, BASE):
            raise DivisionError("division by a jet-dependent factor")
    return tuple((a, -e) for a, e in m)


def _key(terms: Mapping) -> tuple:
    return tuple(sorted(terms.items()))


def _is_const_terms(terms: Mapping) -> bool:
    return all(a[0] == PARAM for m in terms for a, _ in m)


# ---------------------------------------------------------------- JetExpr


class JetExpr:
    """Immutable exact expression in canonical form."""

    __slots__ = ("terms", "_key", "_hash")

    def __init__(self, terms: Mapping | None = None):
        self.terms = dict(terms) if terms else {}
        self._key = None
        self._hash = None

    # construction
    @classmethod
    def const(cls, value) -> "JetExpr":
        value = to_rational(value)
        return cls({(): value} if value else {})

    @classmethod
    def _atom(cls, atom, e=1) -> "JetExpr":
        return cls(_canon({atom: e}))

    @classmethod
    def from_key(cls, key) -> "JetExpr":
        return cls(dict(key))

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = _key(self.terms)
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, JetExpr):
            try:
                other = as_expr(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        """True when only parameters occur (no t, x, jets or functions)."""
        return _is_const_terms(self.terms)

    def rational_value(self):
        """The value of a parameter-free constant, else ``None``."""
        if not self.terms:
            return ZERO
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        return None

    def __len__(self):
        return len(self.terms)

    # arithmetic
    def __add__(self, other):
        other = as_expr(other)
        return JetExpr(_add_into(dict(self.terms), other.terms))

    __radd__ = __add__

    def __neg__(self):
        return JetExpr(_scale_terms(self.terms, -ONE))

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = as_expr(other)
        return JetExpr(_add_into(dict(self.terms), other.terms, -ONE))

    def __rsub__(self, other):
        return as_expr(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, mpq)):
            return JetExpr(_scale_terms(self.terms, mpq(other)))
        other = as_expr(other)
        return JetExpr(_mul_terms(self.terms, other.terms))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_expr(other)
        if len(other.terms) != 1:
            raise DivisionError(f"division by a sum is not supported: {other}")
        (m, c), = other.terms.items()
        inv = _mono_inverse(m)
        factor = _scale_terms(_canon(dict(inv)), 1 / c) if inv else {(): 1 / c}
        return JetExpr(_mul_terms(self.terms, factor))

    def __rtruediv__(self, other):
        return as_expr(other) / self

    def __pow__(self, n):
        return expr_pow(self, n)

    # display
    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"JetExpr({to_string(self)!r})"

    def __lt__(self, other):
        return self.key < other.key


def as_expr(value) -> JetExpr:
    if isinstance(value, JetExpr):
        return value
    if isinstance(value, (int, mpq)) or type(value).__name__ == "Fraction":
        return JetExpr.const(value)
    if isinstance(value, float):
        return JetExpr.const(mpq(value))
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    raise TypeError(f"cannot convert {type(value).__name__} to JetExpr")


def _linear_in_one_coord(terms: Mapping):
    """Split ``terms`` as ``scale*coord + shift`` with constant scale, shift."""
    coord = None
    scale: dict = {}
    shift: dict = {}
    for m, c in terms.items():
        non_param = [(a, e) for a, e in m if a[0] != PARAM]
        if not non_param:
            shift[m] = c
            continue
        if len(non_param) != 1:
            return None
        a, e = non_param[0]
        if a[0] != JET or e != 1 or (coord is not None and a != coord):
            return None
        coord = a
        scale[tuple((b, f) for b, f in m if b[0] == PARAM)] = c
    if coord is None:
        return None
    return coord, scale, shift


def expr_pow(e: JetExpr, n) -> JetExpr:
    n = to_rational(n)
    if _is_nonneg_int(n):
        return JetExpr(_pow_terms(e.terms, int(n)))
    if not e.terms:
        raise DivisionError("zero raised to a negative or fractional power")
    single_coord = False
    if len(e.terms) == 1:
        (m, c), = e.terms.items()
        jets = [(a, k) for a, k in m if a[0] == JET]
        others_params = all(a[0] == PARAM for a, _ in m if a[0] != JET)
        # a scaled coordinate such as 2*p or c^(-2)*v_t becomes a base atom
        single_coord = (len(jets) == 1 and jets[0][1] == 1 and others_params
                        and (c != 1 or len(m) > 1))
    if len(e.terms) == 1 and not single_coord:
        out: dict = {}
        for a, k in m:
            ek = k * n
            if a[0] == PARAM and int(ek) != ek:
                raise ExprError(f"parameter power {PARAMS[a[1]]}^({ek}) is not integral")
            if a[0] in (INDEP, FUNC) and not _is_nonneg_int(ek):
                raise DivisionError("negative or fractional power of t, x or a function symbol")
            if a[0] == JET and not _is_nonneg_int(ek):
                if len(m) != 1 or k != 1:
                    raise ExprError("fractional powers need a linear base")
                base = (BASE, a, _key({(): ONE}), ())
                out[base] = ek
                continue
            out[a] = int(ek) if a[0] != BASE else ek
        if int(n) == n:
            coeff = c ** int(n)
        elif c == 1:
            coeff = ONE
        else:
            raise ExprError("fractional power of a non-unit coefficient")
        return JetExpr(_scale_terms(_canon(out), coeff))
    split = _linear_in_one_coord(e.terms)
    if split is None:
        raise ExprError(f"negative or fractional power of a non-linear expression: {e}")
    coord, scale, shift = split
    if len(scale) == 1:
        (sm, sc), = scale.items()
        if all((f * n).denominator == 1 for _, f in sm) and (n.denominator == 1 or sc == 1):
            # pull a monomial scale out so equal powers share one base atom
            factor = expr_pow(JetExpr(dict(scale)), n)
            monic_shift = JetExpr(dict(shift)) / JetExpr(dict(scale))
            atom = (BASE, coord, _key({(): ONE}), monic_shift.key)
            return factor * JetExpr(_canon({atom: n}))
    atom = (BASE, coord, _key(scale), _key(shift))
    return JetExpr(_canon({atom: n}))


# ---------------------------------------------------------------- symbols


@dataclass(frozen=True, order=True)
class JetCoord:
    depvar: str
    t_order: int = 0
    x_order: int = 0

    def __post_init__(self):
        if self.depvar not in _DEPVAR_INDEX:
            raise ExprError(f"unknown dependent variable {self.depvar!r}")
        if self.t_order < 0 or self.x_order < 0:
            raise ExprError("derivative orders must be non-negative")

    @property
    def atom(self):
        return (JET, _DEPVAR_INDEX[self.depvar], self.t_order, self.x_order)

    @property
    def order(self) -> int:
        return self.t_order + self.x_order

    @property
    def name(self) -> str:
        suffix = "t" * self.t_order + "x" * self.x_order
        return f"{self.depvar}_{suffix}" if suffix else self.depvar

    def expr(self) -> JetExpr:
        return JetExpr._atom(self.atom)

    def shifted(self, direction: str) -> "JetCoord":
        if direction == "t":
            return JetCoord(self.depvar, self.t_order + 1, self.x_order)
        return JetCoord(self.depvar, self.t_order, self.x_order + 1)

    @classmethod
    def from_atom(cls, atom) -> "JetCoord":
        return cls(DEPVARS[atom[1]], atom[2], atom[3])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FuncSym:
    """``base`` differentiated ``deriv_order`` times, applied to ``argument``."""

    base: str
    deriv_order: int
    argument: JetExpr

    @property
    def atom(self):
        return (FUNC, _FUNC_INDEX[self.base], self.deriv_order, self.argument.key)

    def expr(self) -> JetExpr:
        return JetExpr._atom(self.atom)


def param(name: str) -> JetExpr:
    if name not in _PARAM_INDEX:
        raise ExprError(f"unknown parameter {name!r}")
    return JetExpr._atom((PARAM, _PARAM_INDEX[name]))


def indep(name: str) -> JetExpr:
    return JetExpr._atom((INDEP, INDEPS.index(name)))


def jet(depvar: str, t_order: int = 0, x_order: int = 0) -> JetExpr:
    return JetCoord(depvar, t_order, x_order).expr()


def func(base: str, order: int, argument) -> JetExpr:
    return FuncSym(base, order, as_expr(argument)).expr()


def _to_atom(sym):
    """Accept JetCoord / FuncSym / names and return the kernel atom."""
    if isinstance(sym, tuple):
        return sym
    if isinstance(sym, (JetCoord, FuncSym)):
        return sym.atom
    if isinstance(sym, JetExpr):
        if len(sym.terms) == 1:
            (m, c), = sym.terms.items()
            if c == 1 and len(m) == 1 and m[0][1] == 1:
                return m[0][0]
        raise ExprError(f"{sym} is not a single symbol")
    if isinstance(sym, str):
        if sym in _PARAM_INDEX:
            return (PARAM, _PARAM_INDEX[sym])
        if sym in INDEPS:
            return (INDEP, INDEPS.index(sym))
        return coord_from_name(sym).atom
    raise TypeError(f"not a symbol: {sym!r}")


def coord_from_name(name: str) -> JetCoord:
    depvar, _, suffix = name.partition("_")
    if depvar not in _DEPVAR_INDEX or (("_" in name) and not suffix):
        raise ExprError(f"malformed jet coordinate {name!r}")
    if any(ch not in "tx" for ch in suffix):
        raise ExprError(f"malformed derivative suffix in {name!r}")
    return JetCoord(depvar, suffix.count("t"), suffix.count("x"))


# ---------------------------------------------------------------- inspection


_ATOMS_CACHE: dict = {}


def _atoms_of_key(key) -> frozenset:
    """Every parameter, independent variable and jet atom reachable in ``key``."""
    hit = _ATOMS_CACHE.get(key)
    if hit is not None:
        return hit
    found = set()
    for m, _ in key:
        for a, _ in m:
            found |= _atom_deps(a)
    hit = frozenset(found)
    _ATOMS_CACHE[key] = hit
    return hit


def _atom_deps(a) -> set:
    kind = a[0]
    if kind in (PARAM, INDEP, JET):
        return {a}
    if kind == FUNC:
        return set(_atoms_of_key(a[3]))
    return {a[1]} | set(_atoms_of_key(a[2])) | set(_atoms_of_key(a[3]))


def jet_coords(e: JetExpr, depvar: str | None = None) -> list[JetCoord]:
    found = {a for a in _atoms_of_key(e.key) if a[0] == JET}
    coords = sorted(JetCoord.from_atom(a) for a in found)
    if depvar is not None:
        coords = [c for c in coords if c.depvar == depvar]
    return coords


def depends_on(e: JetExpr, sym) -> bool:
    return _to_atom(sym) in _atoms_of_key(e.key)


def has_functions(e: JetExpr) -> bool:
    return any(a[0] in (FUNC, BASE) for m in e.terms for a, _ in m)


def split_params(e: JetExpr) -> dict:
    """Group terms by their parameter-free part.

    Returns ``{monomial: JetExpr}`` where each value is a parameter-only
    coefficient; the zero test of a coefficient is then the zero test of
    a Laurent polynomial in the parameters.
    """
    groups: dict = {}
    for m, c in e.terms.items():
        pm = tuple((a, k) for a, k in m if a[0] == PARAM)
        rest = tuple((a, k) for a, k in m if a[0] != PARAM)
        groups.setdefault(rest, {})[pm] = c
    return {rest: JetExpr(t) for rest, t in groups.items()}


def monomial_expr(m) -> JetExpr:
    return JetExpr({m: ONE})


# ---------------------------------------------------------------- derivatives


_D_CACHE: dict = {}


def _datom(a, d: int) -> dict:
    """Total derivative (d=0: t, d=1: x) of a single atom, as terms."""
    kind = a[0]
    if kind == PARAM:
        return {}
    if kind == INDEP:
        return {(): ONE} if a[1] == d else {}
    hit = _D_CACHE.get((a, d))
    if hit is not None:
        return hit
    if kind == JET:
        nxt = (JET, a[1], a[2] + 1, a[3]) if d == 0 else (JET, a[1], a[2], a[3] + 1)
        out = {((nxt, 1),): ONE}
    elif kind == FUNC:
        darg = _dterms(dict(a[3]), d)
        out = _mul_terms({(((FUNC, a[1], a[2] + 1, a[3]), 1),): ONE}, darg) if darg else {}
    else:
        out = _mul_terms(dict(a[2]), _datom(a[1], d))
    _D_CACHE[(a, d)] = out
    return out


def _dterms(terms: Mapping, d: int) -> dict:
    out: dict = {}
    for m, c in terms.items():
        for idx, (a, e) in enumerate(m):
            da = _datom(a, d)
            if not da:
                continue
            if e == 1:
                rest = m[:idx] + m[idx + 1:]
            else:
                rest = m[:idx] + ((a, e - 1),) + m[idx + 1:]
            ce = c * e
            for m2, c2 in da.items():
                for mm, k in _mono_mul(rest, m2):
                    v = out.get(mm, ZERO) + ce * c2 * k
                    if v:
                        out[mm] = v
                    else:
                        out.pop(mm, None)
    return out


def _direction(direction) -> int:
    if direction in ("t", 0):
        return 0
    if direction in ("x", 1):
        return 1
    raise ExprError(f"direction must be 't' or 'x', got {direction!r}")


def total_derivative(e, direction) -> JetExpr:
    """D_t or D_x, applying the chain rule through every jet coordinate."""
    e = as_expr(e)
    return JetExpr(_dterms(e.terms, _direction(direction)))


def D(e, word: str) -> JetExpr:
    """Iterated total derivative, e.g. ``D(e, "txx")``."""
    e = as_expr(e)
    for ch in word:
        e = total_derivative(e, ch)
    return e


_P_CACHE: dict = {}


def _patom(a, target) -> dict:
    if a == target:
        return {(): ONE}
    kind = a[0]
    if kind in (PARAM, INDEP, JET):
        return {}
    hit = _P_CACHE.get((a, target))
    if hit is not None:
        return hit
    if kind == FUNC:
        if target in _atoms_of_key(a[3]):
            darg = _pterms(dict(a[3]), target)
            out = _mul_terms({(((FUNC, a[1], a[2] + 1, a[3]), 1),): ONE}, darg)
        else:
            out = {}
    else:
        out = {}
        if a[1] == target:
            out = dict(a[2])
        if target in _atoms_of_key(a[2]) or target in _atoms_of_key(a[3]):
            raise ExprError("partial derivative with respect to a base-power parameter")
    _P_CACHE[(a, target)] = out
    return out


def _pterms(terms: Mapping, target) -> dict:
    out: dict = {}
    for m, c in terms.items():
        for idx, (a, e) in enumerate(m):
            da = _patom(a, target)
            if not da:
                continue
            if e == 1:
                rest = m[:idx] + m[idx + 1:]
            else:
                rest = m[:idx] + ((a, e - 1),) + m[idx + 1:]
            ce = c * e
            for m2, c2 in da.items():
                for mm, k in _mono_mul(rest, m2):
                    v = out.get(mm, ZERO) + ce * c2 * k
                    if v:
                        out[mm] = v
                    else:
                        out.pop(mm, None)
    return out


def partial(e, sym) -> JetExpr:
    """Partial derivative with respect to a jet coordinate, t, x or a parameter."""
    e = as_expr(e)
    return JetExpr(_pterms(e.terms, _to_atom(sym)))


def euler_operator(e, depvar: str) -> JetExpr:
    """Variational derivative sum_J (-D)^J dE/dv_J."""
    e = as_expr(e)
    out: dict = {}
    for coord in jet_coords(e, depvar):
        piece = partial(e, coord)
        for _ in range(coord.t_order):
            piece = total_derivative(piece, "t")
        for _ in range(coord.x_order):
            piece = total_derivative(piece, "x")
        _add_into(out, piece.terms, ONE if coord.order % 2 == 0 else -ONE)
    return JetExpr(out)


# ---------------------------------------------------------------- substitution


def _substitute(e: JetExpr, atom_fn: Callable, func_fn: Callable | None = None) -> JetExpr:
    """Replace atoms through callbacks; ``None`` from a callback keeps the atom.

    ``atom_fn(atom)`` handles parameters, t, x and jet coordinates;
    ``func_fn(base_index, order, new_argument)`` may replace function symbols.
    """
    memo: dict = {}

    def sub_atom(a):
        hit = memo.get(a)
        if hit is not None:
            return hit
        kind = a[0]
        if kind in (PARAM, INDEP, JET):
            r = atom_fn(a)
            res = r if r is not None else JetExpr._atom(a)
        elif kind == FUNC:
            arg = sub(JetExpr.from_key(a[3]))
            r = func_fn(a[1], a[2], arg) if func_fn else None
            res = r if r is not None else JetExpr._atom((FUNC, a[1], a[2], arg.key))
        else:
            res = None  # handled with its exponent
        memo[a] = res
        return res

    def sub_base(a, e):
        coord = sub_atom(a[1])
        scale = sub(JetExpr.from_key(a[2]))
        shift = sub(JetExpr.from_key(a[3]))
        return expr_pow(scale * coord + shift, e)

    def sub(x: JetExpr) -> JetExpr:
        out: dict = {}
        for m, c in x.terms.items():
            acc: dict = {(): c}
            for a, e in m:
                if a[0] == BASE:
                    piece = sub_base(a, e).terms
                else:
                    r = sub_atom(a)
                    piece = expr_pow(r, int(e)).terms if e < 0 else _pow_terms(r.terms, int(e))
                acc = _mul_terms(acc, piece)
                if not acc:
                    break
            _add_into(out, acc)
        return JetExpr(out)

    return sub(e)


def _binding_map(bindings: Mapping):
    atoms: dict = {}
    funcs: dict = {}
    for k, v in bindings.items():
        if isinstance(k, str) and k in _FUNC_INDEX:
            funcs[_FUNC_INDEX[k]] = v
        else:
            atoms[_to_atom(k)] = as_expr(v) if not callable(v) else v
    return atoms, funcs


def _check_acyclic(atoms: Mapping, funcs: Mapping):
    graph = {}
    for a, v in atoms.items():
        graph[a] = {b for b in _atoms_of_key(v.key) if b in atoms}
        for fi in funcs:
            if any(m_a[0] == FUNC and m_a[1] == fi for m in v.terms for m_a, _ in m):
                raise CyclicBindingError("binding value refers to a bound function")
    state: dict = {}

    def visit(n):
        state[n] = 1
        for m in graph.get(n, ()):
            if state.get(m) == 1:
                raise CyclicBindingError("cyclic binding detected")
            if m not in state:
                visit(m)
        state[n] = 2

    for n in graph:
        if n not in state:
            visit(n)


def substitute(e, bindings: Mapping) -> JetExpr:
    """Simultaneous substitution.

    Keys may be jet coordinates (``JetCoord`` or names like ``"p_x"``),
    ``"t"``, ``"x"``, parameter names, or a function name (``"f"``/``"h"``)
    bound to an object with ``derivative(order, argument) -> JetExpr``.
    """
    e = as_expr(e)
    atoms, funcs = _binding_map(bindings)
    _check_acyclic(atoms, funcs)

    def func_fn(b, k, arg):
        spec = funcs.get(b)
        return spec.derivative(k, arg) if spec is not None else None

    return _substitute(e, atoms.get, func_fn if funcs else None)


# ---------------------------------------------------------------- numerics


def eval_numeric(e, assignment: Mapping, functions: Mapping | None = None):
    """Evaluate with float (or numpy array) values.

    ``assignment`` maps parameter names, ``t``, ``x`` and jet coordinate
    names to values; ``functions`` maps ``"f"``/``"h"`` to objects with
    ``numeric(order, y)``.
    """
    e = as_expr(e)
    functions = functions or {}
    cache: dict = {}

    def value_of_atom(a):
        hit = cache.get(a)
        if hit is not None:
            return hit
        kind = a[0]
        if kind == PARAM:
            name = PARAMS[a[1]]
        elif kind == INDEP:
            name = INDEPS[a[1]]
        elif kind == JET:
            name = JetCoord.from_atom(a).name
        else:
            name = None
        if name is not None:
            if name not in assignment:
                raise UnassignedSymbolError(f"no value assigned to {name}")
            val = assignment[name]
        elif kind == FUNC:
            fname = FUNCS[a[1]]
            spec = functions.get(fname)
            if spec is None:
                raise NonConcreteFunctionError(f"{fname} has no concrete family")
            val = spec.numeric(a[2], value(JetExpr.from_key(a[3])))
        else:
            val = value(JetExpr._atom(a[1])) * value(JetExpr.from_key(a[2])) + \
                value(JetExpr.from_key(a[3]))
        cache[a] = val
        return val

    def value(x: JetExpr):
        total = 0.0
        for m, c in x.terms.items():
            term = float(c)
            for a, k in m:
                v = value_of_atom(a)
                term = term * (v ** (float(k) if a[0] == BASE else int(k)))
            total = total + term
        return total

    return value(e)


# ---------------------------------------------------------------- printing


def _fmt_exp(e) -> str:
    if int(e) == e and e > 0:
        return f"^{int(e)}"
    return f"^({e})"


def _fmt_atom(a, e) -> str:
    kind = a[0]
    if kind == PARAM:
        s = PARAMS[a[1]]
    elif kind == INDEP:
        s = INDEPS[a[1]]
    elif kind == JET:
        s = JetCoord.from_atom(a).name
    elif kind == FUNC:
        s = f"{FUNCS[a[1]]}{chr(39) * a[2]}({to_string(JetExpr.from_key(a[3]))})"
    else:
        lin = JetExpr(_base_linear(a))
        inner = to_string(lin)
        s = inner if (len(lin.terms) == 1 and a[2] == _key({(): ONE})) else f"({inner})"
        return s + _fmt_exp(e)
    return s if e == 1 else s + _fmt_exp(e)


def to_string(e: JetExpr) -> str:
    if not e.terms:
        return "0"
    parts = []
    for m, c in e.key:
        neg = c < 0
        mag = -c if neg else c
        factors = [_fmt_atom(a, k) for a, k in m]
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        parts.append(("-" if neg else "+", body))
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------- helpers


def total_degree_monomials(symbols: Iterable[JetExpr], degree: int) -> list[JetExpr]:
    """All products of ``symbols`` with total degree <= ``degree`` (1 included)."""
    symbols = list(symbols)
    out = [JetExpr.const(1)]
    frontier = [(JetExpr.const(1), 0)]
    for _ in range(degree):
        nxt = []
        for mono, start in frontier:
            for i in range(start, len(symbols)):
                prod = mono * symbols[i]
                out.append(prod)
                nxt.append((prod, i))
        frontier = nxt
    return out
