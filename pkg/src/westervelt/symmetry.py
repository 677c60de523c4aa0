"""Point symmetries in characteristic form.

A characteristic assigns ``P^v = eta^v - tau v_t - xi v_x`` to each dependent
variable.  It is a symmetry of a system when the linearization of every
equation along it vanishes on solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .kernel import (
    ExprError,
    JetCoord,
    JetExpr,
    as_expr,
    indep,
    jet,
    jet_coords,
    partial,
    split_params,
    total_degree_monomials,
    total_derivative,
)
from .linsolve import nullspace
from .systems import DiffSystem, build_pot2_layer1, build_pot2_layer2


class ProjectionError(ExprError):
    """A potential characteristic does not project to the local variable."""


class AnsatzTooLarge(ExprError):
    pass


def _expr_map(components) -> dict:
    return {k: as_expr(v) for k, v in dict(components).items()}


class Characteristic(dict):
    """Mapping ``depvar -> JetExpr``."""

    def __init__(self, components=(), **kw):
        super().__init__(_expr_map(dict(components, **kw)))

    def __str__(self):
        return "(" + ", ".join(f"P^{k} = {v}" for k, v in self.items()) + ")"


@dataclass(frozen=True)
class Generator:
    """Vector field ``tau d_t + xi d_x + sum eta^v d_v`` on (t, x, depvars)."""

    tau: JetExpr
    xi: JetExpr
    eta: tuple  # ((depvar, JetExpr), ...)

    @classmethod
    def make(cls, tau=0, xi=0, **eta):
        return cls(as_expr(tau), as_expr(xi), tuple(sorted((k, as_expr(v)) for k, v in eta.items())))

    @property
    def eta_map(self) -> dict:
        return dict(self.eta)

    def component(self, name) -> JetExpr:
        if name == "t":
            return self.tau
        if name == "x":
            return self.xi
        return self.eta_map.get(name, JetExpr())

    def variables(self) -> list:
        return ["t", "x"] + [k for k, _ in self.eta]

    def apply(self, F) -> JetExpr:
        """Action on a function of (t, x, depvars)."""
        F = as_expr(F)
        out = self.tau * partial(F, "t") + self.xi * partial(F, "x")
        for v, e in self.eta:
            out = out + e * partial(F, JetCoord(v))
        return out

    def __mul__(self, scalar):
        scalar = as_expr(scalar)
        return Generator(self.tau * scalar, self.xi * scalar, tuple((k, v * scalar) for k, v in self.eta))

    __rmul__ = __mul__

    def __add__(self, other):
        names = sorted(set(self.eta_map) | set(other.eta_map))
        return Generator(self.tau + other.tau, self.xi + other.xi,
                         tuple((n, self.component(n) + other.component(n)) for n in names))

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return self.tau.is_zero() and self.xi.is_zero() and all(v.is_zero() for _, v in self.eta)

    def __eq__(self, other):
        if not isinstance(other, Generator):
            return NotImplemented
        names = set(self.eta_map) | set(other.eta_map)
        return (self.tau == other.tau and self.xi == other.xi
                and all(self.component(n) == other.component(n) for n in names))

    def __hash__(self):
        return hash((self.tau, self.xi, tuple((k, v) for k, v in self.eta if not v.is_zero())))

    def substitute(self, bindings) -> "Generator":
        from .kernel import substitute

        return Generator(substitute(self.tau, bindings), substitute(self.xi, bindings),
                         tuple((k, substitute(v, bindings)) for k, v in self.eta))

    def __str__(self):
        parts = [f"({self.tau})*d_t", f"({self.xi})*d_x"] + [f"({v})*d_{k}" for k, v in self.eta]
        return " + ".join(p for p, e in zip(parts, [self.tau, self.xi] + [v for _, v in self.eta])
                          if not e.is_zero()) or "0"


def to_characteristic(g: Generator, depvars) -> Characteristic:
    out = {}
    for v in depvars:
        out[v] = g.component(v) - g.tau * jet(v, 1, 0) - g.xi * jet(v, 0, 1)
    return Characteristic(out)


def lie_bracket(g1: Generator, g2: Generator) -> Generator:
    """Commutator: component a is g1(g2^a) - g2(g1^a)."""
    names = sorted(set(g1.eta_map) | set(g2.eta_map))
    comp = {}
    for a in ["t", "x"] + names:
        comp[a] = g1.apply(g2.component(a)) - g2.apply(g1.component(a))
    return Generator(comp["t"], comp["x"], tuple((n, comp[n]) for n in names))


def _d_word(e: JetExpr, i: int, j: int, cache: dict) -> JetExpr:
    key = (e.key, i, j)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if i == 0 and j == 0:
        out = e
    elif j > 0:
        out = total_derivative(_d_word(e, i, j - 1, cache), "x")
    else:
        out = total_derivative(_d_word(e, i - 1, j, cache), "t")
    cache[key] = out
    return out


def linearize_along(P, e, cache: dict | None = None) -> JetExpr:
    """Frechet derivative of ``e`` in the direction of the characteristic ``P``."""
    e = as_expr(e)
    cache = {} if cache is None else cache
    out = JetExpr()
    for coord in jet_coords(e):
        if coord.depvar not in P:
            raise ExprError(f"characteristic has no component for {coord.depvar}")
        comp = as_expr(P[coord.depvar])
        if comp.is_zero():
            continue
        out = out + partial(e, coord) * _d_word(comp, coord.t_order, coord.x_order, cache)
    return out


def complete_characteristic(sys: DiffSystem, P) -> Characteristic:
    """Fill the components that the potential systems determine.

    For the second potential system the local variable is fixed by the
    potential: ``p = v_t/c^2`` in the first layer and ``v = w_t`` in the
    second.
    """
    P = Characteristic(P)
    if sys.name == "pot2.l1" and "p" not in P:
        # c^2 P^p = D_t P^v on solutions
        P["p"] = sys.reduce(total_derivative(P["v"], "t")) / sys.params["c"] ** 2
    if sys.name == "pot2.l2" and "v" not in P:
        P["v"] = sys.reduce(total_derivative(P["w"], "t"))
    missing = [v for v in sys.depvars if v not in P]
    if missing:
        raise ExprError(f"characteristic lacks components {missing}")
    return P


def symmetry_residual(sys: DiffSystem, P) -> list:
    """On-shell linearization of each equation; all zero iff ``P`` is a symmetry."""
    P = complete_characteristic(sys, P)
    cache: dict = {}
    return [sys.reduce(linearize_along(P, eq.residual, cache)) for eq in sys.equations]


def is_symmetry(sys: DiffSystem, P) -> bool:
    return all(r.is_zero() for r in symmetry_residual(sys, P))


def _strip_potentials(e: JetExpr, c2: JetExpr) -> JetExpr:
    from .kernel import substitute

    bindings = {}
    for coord in jet_coords(e):
        if coord.depvar == "v" and coord.t_order >= 1:
            bindings[coord] = c2 * jet("p", coord.t_order - 1, coord.x_order)
        elif coord.depvar != "p":
            raise ProjectionError(f"projection leaves the potential coordinate {coord}")
    return substitute(e, bindings) if bindings else e


def _component(P, name):
    if not isinstance(P, dict):
        return as_expr(P)
    if name not in P:
        raise ProjectionError(f"characteristic has no {name} component to project")
    return as_expr(P[name])


def project_pot2(P, layer: int, sys: DiffSystem | None = None) -> JetExpr:
    """Local component ``P^p`` induced by a pot2 characteristic.

    Layer 1 uses ``D_t P^v / c^2``; layer 2 uses ``D_t^2 P^w / c^2``.
    """
    if layer == 1:
        sys = sys or build_pot2_layer1()
        comp = _component(P, "v")
        c2 = sys.params["c"] ** 2
        out = sys.reduce(total_derivative(comp, "t"))
        for coord in jet_coords(out):
            if coord.depvar != "p":
                raise ProjectionError(f"projection leaves the potential coordinate {coord}")
        return out / c2
    if layer == 2:
        sys = sys or build_pot2_layer2()
        comp = _component(P, "w")
        c2 = sys.params["c"] ** 2
        out = sys.reduce(total_derivative(total_derivative(comp, "t"), "t"))
        return _strip_potentials(out, c2) / c2
    raise ExprError("layer must be 1 or 2")


# ----------------------------------------------------------------- search


@dataclass(frozen=True)
class SymmetryAnsatz:
    degree: int = 1
    max_unknowns: int = 600


def _ansatz_monomials(depvars, degree):
    syms = [indep("t"), indep("x")] + [jet(v) for v in depvars]
    return total_degree_monomials(syms, degree)


def symmetry_search(sys: DiffSystem, degree: int = 1, max_unknowns: int = 600) -> list:
    """Basis of point-symmetry characteristics with polynomial tau, xi, eta.

    ``tau``, ``xi`` and each ``eta^v`` range over polynomials of total degree
    at most ``degree`` in (t, x, depvars) with unknown coefficients.
    """
    monos = _ansatz_monomials(sys.depvars, degree)
    slots = ["tau", "xi"] + [f"eta_{v}" for v in sys.depvars]
    n = len(slots) * len(monos)
    if n > max_unknowns:
        raise AnsatzTooLarge(f"ansatz has {n} unknowns (limit {max_unknowns})")
    unknowns = list(product(slots, range(len(monos))))
    columns = []
    for slot, mi in unknowns:
        m = monos[mi]
        P = {}
        for v in sys.depvars:
            if slot == "tau":
                P[v] = -m * jet(v, 1, 0)
            elif slot == "xi":
                P[v] = -m * jet(v, 0, 1)
            elif slot == f"eta_{v}":
                P[v] = m
            else:
                P[v] = JetExpr()
        cache: dict = {}
        columns.append([sys.reduce(linearize_along(P, eq.residual, cache)) for eq in sys.equations])
    rows = _rows_from_columns(columns)
    basis = []
    for vec in nullspace(rows, n):
        P = {v: JetExpr() for v in sys.depvars}
        for (slot, mi), coef in zip(unknowns, vec):
            if coef.is_zero():
                continue
            m = monos[mi] * coef
            for v in sys.depvars:
                if slot == "tau":
                    P[v] = P[v] - m * jet(v, 1, 0)
                elif slot == "xi":
                    P[v] = P[v] - m * jet(v, 0, 1)
                elif slot == f"eta_{v}":
                    P[v] = P[v] + m
        basis.append(Characteristic(P))
    return basis


def _rows_from_columns(columns) -> list:
    """Split residual components by parameter-free monomial into linear equations."""
    rows: dict = {}
    for col, residuals in enumerate(columns):
        for eq_index, r in enumerate(residuals):
            for mono, coeff in split_params(r).items():
                rows.setdefault((eq_index, mono), {})[col] = coeff
    return [rows[k] for k in sorted(rows)]


def characteristic_in_span(basis: list, P, depvars) -> bool:
    """Exact membership of ``P`` in the span of ``basis``.

    Components are compared monomial by monomial after splitting off
    parameter coefficients.
    """
    from .linsolve import in_span

    keys = set()
    vecs = []
    for B in list(basis) + [P]:
        d = {}
        for v in depvars:
            for mono, coeff in split_params(as_expr(B.get(v, 0))).items():
                d[(v, mono)] = coeff
                keys.add((v, mono))
        vecs.append(d)
    keys = sorted(keys)
    as_rows = [[d.get(k, JetExpr()) for k in keys] for d in vecs]
    return in_span(as_rows[:-1], as_rows[-1])
