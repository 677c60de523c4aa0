"""The damped nonlinear wave equation and its potential systems in solved form.

Every system lists its own equations (the ones whose symmetries and
multipliers are studied) plus, separately, integrability equations that
are only used to reduce expressions onto the solution space.  The main
equation is solved for ``p_txx`` because its coefficient is the constant
``-beta``; solving for ``p_tt`` would divide by ``f'(p)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .families import FSpec
from .kernel import (
    JET,
    ExprError,
    JetCoord,
    JetExpr,
    _substitute,
    as_expr,
    depends_on,
    jet,
    param,
    partial,
    total_derivative,
)

SYSTEM_NAMES = ("westervelt", "pot1.l1", "pot1.l2", "pot2.l1", "pot2.l2")


class SystemDefinitionError(ExprError):
    pass


class ReductionError(ExprError):
    """Reduction did not terminate within the order guard."""


@dataclass(frozen=True)
class Equation:
    residual: JetExpr
    leading: JetCoord
    solved_rhs: JetExpr
    label: str = ""

    @classmethod
    def solve(cls, residual, leading, label=""):
        """Solve ``residual = 0`` for ``leading``; its coefficient must be an invertible constant."""
        residual = as_expr(residual)
        if isinstance(leading, str):
            from .kernel import coord_from_name

            leading = coord_from_name(leading)
        coeff = partial(residual, leading)
        if depends_on(coeff, leading) or not coeff.is_constant() or len(coeff) != 1:
            raise SystemDefinitionError(f"{label}: coefficient of {leading} must be a single nonzero constant term")
        rest = residual - coeff * leading.expr()
        if depends_on(rest, leading):
            raise SystemDefinitionError(f"{label}: residual is not linear in {leading}")
        return cls(residual, leading, -rest / coeff, label)


def _dominates(c, lead) -> bool:
    return c[1] == lead[1] and c[2] >= lead[2] and c[3] >= lead[3]


@dataclass
class DiffSystem:
    name: str
    depvars: tuple
    equations: tuple
    integrability: tuple = ()
    nondegeneracy: tuple = ()
    fspec: FSpec = field(default_factory=FSpec.generic)
    params: dict = field(default_factory=dict)
    order_guard: int = 12

    def __post_init__(self):
        leads = [e.leading for e in self.rules]
        if len(set(leads)) != len(leads):
            raise SystemDefinitionError(f"{self.name}: leading derivatives must be distinct")
        used = {c.depvar for e in self.equations for c in _coords(e.residual)}
        missing = set(self.depvars) - used
        if missing:
            raise SystemDefinitionError(f"{self.name}: dependent variables {sorted(missing)} appear in no equation")
        self._lead_atoms = [(e.leading.atom, e) for e in self.rules]
        self._memo: dict = {}
        self._active: set = set()

    @property
    def rules(self) -> tuple:
        return tuple(self.equations) + tuple(self.integrability)

    @property
    def residuals(self) -> list:
        return [e.residual for e in self.equations]

    def _rule_for(self, atom):
        for lead, eq in self._lead_atoms:
            if _dominates(atom, lead):
                return lead, eq
        return None

    def is_principal(self, coord) -> bool:
        atom = coord.atom if isinstance(coord, JetCoord) else coord
        return self._rule_for(atom) is not None

    def parametric_coords(self, depvar: str, max_order: int) -> list:
        out = []
        for order in range(max_order + 1):
            for i in range(order, -1, -1):
                c = JetCoord(depvar, i, order - i)
                if not self.is_principal(c):
                    out.append(c)
        return out

    def reduce_coord(self, atom) -> JetExpr:
        hit = self._memo.get(atom)
        if hit is not None:
            return hit
        found = self._rule_for(atom)
        if found is None:
            return JetExpr._atom(atom)
        if atom[2] + atom[3] > self.order_guard or atom in self._active:
            raise ReductionError(f"{self.name}: reduction of {JetCoord.from_atom(atom)} does not terminate")
        self._active.add(atom)
        try:
            lead, eq = found
            if atom == lead:
                res = self.reduce(eq.solved_rhs)
            else:
                # step back in x first when possible so t-derivatives stay low
                if atom[3] > lead[3]:
                    parent, d = (JET, atom[1], atom[2], atom[3] - 1), 1
                else:
                    parent, d = (JET, atom[1], atom[2] - 1, atom[3]), 0
                res = self.reduce(total_derivative(self.reduce_coord(parent), d))
        finally:
            self._active.discard(atom)
        self._memo[atom] = res
        return res

    def reduce(self, e) -> JetExpr:
        """On-shell normal form: no principal coordinate survives."""
        e = as_expr(e)

        def atom_fn(a):
            if a[0] == JET and self._rule_for(a) is not None:
                return self.reduce_coord(a)
            return None

        return _substitute(e, atom_fn)

    def __repr__(self):
        return f"DiffSystem({self.name!r}, depvars={self.depvars})"


def _coords(e):
    from .kernel import jet_coords

    return jet_coords(e)


def _param_or_value(name, value) -> JetExpr:
    return param(name) if value is None else as_expr(value)


def _nonzero(name, e: JetExpr):
    if e.is_zero():
        raise SystemDefinitionError(f"{name} must be nonzero")
    return e


def westervelt_residual(f: FSpec, beta, c, var="p") -> JetExpr:
    p = jet(var)
    return (f.derivative(1, p) * jet(var, 2, 0) + f.derivative(2, p) * jet(var, 1, 0) ** 2
            - beta * jet(var, 1, 2) - c ** 2 * jet(var, 0, 2))


def build_westervelt(f: FSpec | None = None, beta=None, c=None) -> DiffSystem:
    f = f or FSpec.generic()
    beta = _nonzero("beta", _param_or_value("beta", beta))
    c = _nonzero("c", _param_or_value("c", c))
    eq = Equation.solve(westervelt_residual(f, beta, c), JetCoord("p", 1, 2), "main")
    return DiffSystem("westervelt", ("p",), (eq,), (), ("beta != 0", "c != 0", "f'' != 0"), f,
                      {"beta": beta, "c": c})


def _pot1_layer1_equations(f, beta, c, mu):
    p = jet("p")
    ux = Equation.solve(f.derivative(1, p) * jet("p", 1, 0) - mu * jet("p", 0, 2) - jet("u", 0, 1),
                        JetCoord("u", 0, 1), "u_x")
    ut = Equation.solve(c ** 2 * jet("p", 0, 1) + (beta - mu) * jet("p", 1, 1) - jet("u", 1, 0),
                        JetCoord("u", 1, 0), "u_t")
    return ux, ut


def build_pot1_layer1(mu=None, f: FSpec | None = None, beta=None, c=None) -> DiffSystem:
    f = f or FSpec.generic()
    beta = _nonzero("beta", _param_or_value("beta", beta))
    c = _nonzero("c", _param_or_value("c", c))
    mu = _param_or_value("mu", mu)
    main = build_westervelt(f, beta, c).equations
    return DiffSystem("pot1.l1", ("p", "u"), _pot1_layer1_equations(f, beta, c, mu), main,
                      ("beta != 0", "c != 0"), f, {"beta": beta, "c": c, "mu": mu})


def build_pot1_layer2(mu=None, sigma=None, f: FSpec | None = None, beta=None, c=None) -> DiffSystem:
    f = f or FSpec.generic()
    beta = _nonzero("beta", _param_or_value("beta", beta))
    c = _nonzero("c", _param_or_value("c", c))
    mu = _param_or_value("mu", mu)
    sigma = _param_or_value("sigma", sigma)
    p, u = jet("p"), jet("u")
    own = (
        Equation.solve(f.derivative(0, p) - jet("v", 0, 1), JetCoord("v", 0, 1), "v_x"),
        Equation.solve(mu * jet("p", 0, 1) + u - jet("v", 1, 0), JetCoord("v", 1, 0), "v_t"),
        Equation.solve(c ** 2 * p + (beta - mu - sigma) * jet("p", 1, 0) - jet("w", 1, 0),
                       JetCoord("w", 1, 0), "w_t"),
        Equation.solve(-sigma * jet("p", 0, 1) + u - jet("w", 0, 1), JetCoord("w", 0, 1), "w_x"),
    )
    integ = _pot1_layer1_equations(f, beta, c, mu) + build_westervelt(f, beta, c).equations
    return DiffSystem("pot1.l2", ("p", "u", "v", "w"), own, integ, ("beta != 0", "c != 0"), f,
                      {"beta": beta, "c": c, "mu": mu, "sigma": sigma})


def build_pot2_layer1(f: FSpec | None = None, beta=None, c=None) -> DiffSystem:
    f = f or FSpec.generic()
    beta = _nonzero("beta", _param_or_value("beta", beta))
    c = _nonzero("c", _param_or_value("c", c))
    p = jet("p")
    own = (
        Equation.solve(f.derivative(1, p) * jet("p", 1, 0) - beta * jet("p", 0, 2) - jet("v", 0, 2),
                       JetCoord("v", 0, 2), "v_xx"),
        Equation.solve(c ** 2 * p - jet("v", 1, 0), JetCoord("v", 1, 0), "v_t"),
    )
    main = build_westervelt(f, beta, c).equations
    return DiffSystem("pot2.l1", ("p", "v"), own, main, ("beta != 0", "c != 0"), f,
                      {"beta": beta, "c": c})


def potential_equation_residual(f: FSpec, beta, c) -> JetExpr:
    """t-derivative of ``f(v_t/c^2) - (beta/c^2) v_xx`` minus ``v_xx``."""
    arg = jet("v", 1, 0) / c ** 2
    return (f.derivative(1, arg) * jet("v", 2, 0) / c ** 2
            - beta / c ** 2 * jet("v", 1, 2) - jet("v", 0, 2))


def build_pot2_layer2(f: FSpec | None = None, beta=None, c=None) -> DiffSystem:
    f = f or FSpec.generic()
    beta = _nonzero("beta", _param_or_value("beta", beta))
    c = _nonzero("c", _param_or_value("c", c))
    arg = jet("v", 1, 0) / c ** 2
    own = (
        Equation.solve(f.derivative(0, arg) - beta / c ** 2 * jet("v", 0, 2) - jet("w", 0, 2),
                       JetCoord("w", 0, 2), "w_xx"),
        Equation.solve(jet("v") - jet("w", 1, 0), JetCoord("w", 1, 0), "w_t"),
    )
    integ = (Equation.solve(potential_equation_residual(f, beta, c), JetCoord("v", 1, 2), "potential"),)
    return DiffSystem("pot2.l2", ("v", "w"), own, integ, ("beta != 0", "c != 0"), f,
                      {"beta": beta, "c": c})


def build_system(name: str, f: FSpec | None = None, **params) -> DiffSystem:
    builders = {
        "westervelt": build_westervelt,
        "pot1.l1": build_pot1_layer1,
        "pot1.l2": build_pot1_layer2,
        "pot2.l1": build_pot2_layer1,
        "pot2.l2": build_pot2_layer2,
    }
    if name not in builders:
        raise SystemDefinitionError(f"unknown system {name!r}; choose from {', '.join(SYSTEM_NAMES)}")
    return builders[name](f=f, **params)
