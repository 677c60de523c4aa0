"""Conservation laws: divergence identities, multipliers and flux recovery.

A law is a multiplier vector ``Q`` (one entry per equation) together with a
density ``T`` and flux ``Phi`` such that ``Q . G = D_t T + D_x Phi`` holds
identically in the jet variables.  Nonlocal densities are written through
the potential variables, so everything stays local.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import comb

import numpy as np

from .families import FSpec
from .kernel import (
    BASE,
    FUNC,
    INDEP,
    JET,
    ExprError,
    JetCoord,
    JetExpr,
    _atoms_of_key,
    _substitute,
    as_expr,
    depends_on,
    euler_operator,
    expr_pow,
    has_functions,
    indep,
    jet,
    jet_coords,
    partial,
    split_params,
    substitute,
    total_degree_monomials,
    total_derivative,
)
from .linsolve import in_span, nullspace
from .systems import DiffSystem


class ReconstructionError(ExprError):
    pass


class PathSingularity(ReconstructionError):
    """The homotopy base state sits on a singularity of the integrand."""


class AnsatzGuardError(ExprError):
    pass


@dataclass(frozen=True)
class ConsLaw:
    Q: tuple
    T: JetExpr
    Phi: JetExpr
    label: str = ""

    @classmethod
    def make(cls, Q, T, Phi, label=""):
        if not isinstance(Q, (list, tuple)):
            Q = (Q,)
        return cls(tuple(as_expr(q) for q in Q), as_expr(T), as_expr(Phi), label)


def _weighted_sum(Q, sys: DiffSystem) -> JetExpr:
    Q = tuple(as_expr(q) for q in (Q if isinstance(Q, (list, tuple)) else (Q,)))
    if len(Q) != len(sys.equations):
        raise ExprError(f"{sys.name} has {len(sys.equations)} equations but Q has {len(Q)} entries")
    out = JetExpr()
    for q, eq in zip(Q, sys.equations):
        if not q.is_zero():
            out = out + q * eq.residual
    return out


def divergence_residual(law: ConsLaw, sys: DiffSystem) -> JetExpr:
    """``Q . G - D_t T - D_x Phi``; zero certifies the law off-shell."""
    return _weighted_sum(law.Q, sys) - total_derivative(law.T, "t") - total_derivative(law.Phi, "x")


def multiplier_residual(Q, sys: DiffSystem) -> list:
    """Euler images of ``Q . G``, one per dependent variable."""
    F = _weighted_sum(Q, sys)
    return [euler_operator(F, v) for v in sys.depvars]


def is_multiplier(Q, sys: DiffSystem) -> bool:
    return all(r.is_zero() for r in multiplier_residual(Q, sys))


# ----------------------------------------------------------------- search


@dataclass(frozen=True)
class Ansatz:
    """Polynomial multiplier ansatz.

    Entries are sums of ``t^a x^b * m`` with ``a, b <= coeff_degree`` and ``m``
    a product of at most ``degree`` parametric jet coordinates of order
    ``<= order``.
    """

    order: int = 2
    degree: int = 1
    coeff_degree: int = 1
    max_unknowns: int = 400

    def dimension(self, sys: DiffSystem) -> int:
        return len(sys.equations) * len(self.coeff_monomials()) * len(self.jet_monomials(sys))

    def coeff_monomials(self) -> list:
        t, x = indep("t"), indep("x")
        return [t ** a * x ** b for a in range(self.coeff_degree + 1) for b in range(self.coeff_degree + 1)]

    def jet_monomials(self, sys: DiffSystem) -> list:
        coords = [c.expr() for v in sys.depvars for c in sys.parametric_coords(v, self.order)]
        return total_degree_monomials(coords, self.degree)


@dataclass
class MultiplierBasis:
    system: str
    ansatz: Ansatz
    dimension: int
    basis: list = field(default_factory=list)

    def __len__(self):
        return len(self.basis)

    def contains(self, Q) -> bool:
        return multiplier_in_span(self.basis, Q)


def find_multipliers(sys: DiffSystem, ansatz: Ansatz | None = None) -> MultiplierBasis:
    ansatz = ansatz or Ansatz()
    dim = ansatz.dimension(sys)
    if dim > ansatz.max_unknowns:
        raise AnsatzGuardError(f"ansatz dimension {dim} exceeds guard {ansatz.max_unknowns}")
    cms = ansatz.coeff_monomials()
    jms = ansatz.jet_monomials(sys)
    unknowns = list(product(range(len(sys.equations)), cms, jms))
    rows: dict = {}
    for col, (i, cm, jm) in enumerate(unknowns):
        F = cm * jm * sys.equations[i].residual
        for vi, v in enumerate(sys.depvars):
            for mono, coeff in split_params(euler_operator(F, v)).items():
                rows.setdefault((vi, mono), {})[col] = coeff
    basis = []
    for vec in nullspace([rows[k] for k in sorted(rows)], dim):
        Q = [JetExpr() for _ in sys.equations]
        for (i, cm, jm), coef in zip(unknowns, vec):
            if not coef.is_zero():
                Q[i] = Q[i] + coef * cm * jm
        basis.append(tuple(Q))
    return MultiplierBasis(sys.name, ansatz, dim, basis)


def multiplier_in_span(basis: list, Q) -> bool:
    Q = tuple(as_expr(q) for q in (Q if isinstance(Q, (list, tuple)) else (Q,)))
    keys = set()
    vecs = []
    for B in list(basis) + [Q]:
        d = {}
        for i, q in enumerate(B):
            for mono, coeff in split_params(as_expr(q)).items():
                d[(i, mono)] = coeff
                keys.add((i, mono))
        vecs.append(d)
    keys = sorted(keys)
    rows = [[d.get(k, JetExpr()) for k in keys] for d in vecs]
    if not basis:
        return all(x.is_zero() for x in rows[-1])
    return in_span(rows[:-1], rows[-1])


# ----------------------------------------------------------------- flux recovery


def _mentions(a, y) -> bool:
    if a[0] == FUNC:
        return y in _atoms_of_key(a[3])
    return a[0] == BASE and a[1] == y


def _antiderivative(A: JetExpr, y) -> JetExpr:
    """``Theta`` with ``d Theta / d y = A`` for the jet atom ``y``."""
    out = JetExpr()
    for m, c in A.terms.items():
        power = 0
        special = None
        rest = []
        for a, e in m:
            if a == y:
                power = e
            elif _mentions(a, y):
                if special is not None:
                    raise ReconstructionError("integrand has two nonlinear factors in the same variable")
                special = (a, e)
            else:
                rest.append((a, e))
        coeff = JetExpr({tuple(rest): c})
        if special is None:
            out = out + coeff * JetExpr._atom(y, power + 1) / (power + 1)
            continue
        a, e = special
        if power:
            raise ReconstructionError("polynomial times function factor is not integrated")
        if a[0] == BASE:
            if e == -1:
                raise ReconstructionError("logarithmic antiderivative")
            scale = JetExpr.from_key(a[2])
            out = out + coeff * JetExpr._atom(a, e + 1) / ((e + 1) * scale)
            continue
        arg = JetExpr.from_key(a[3])
        slope = partial(arg, y)
        if e != 1 or depends_on(slope, y) or not slope.is_constant() or a[2] == 0:
            raise ReconstructionError("function factor cannot be integrated in closed form")
        out = out + coeff * JetExpr._atom((FUNC, a[1], a[2] - 1, a[3])) / slope
    return out


def _pick_top(coords: list) -> JetCoord:
    # highest order first; among those prefer a coordinate with an x-derivative
    return max(coords, key=lambda c: (c.order, c.x_order > 0, c.x_order, c.depvar))


def _t_antiderivative(F: JetExpr) -> JetExpr:
    t = (INDEP, 0)
    out = JetExpr()
    for m, c in F.terms.items():
        k = dict(m).get(t, 0)
        rest = tuple((a, e) for a, e in m if a != t)
        out = out + JetExpr({rest: c}) * JetExpr._atom(t, k + 1) / (k + 1)
    return out


def integrate_by_parts(F, max_steps: int = 400):
    """Split a total divergence as ``D_t T + D_x Phi`` by peeling top coordinates."""
    F = as_expr(F)
    T, Phi = JetExpr(), JetExpr()
    for _ in range(max_steps):
        if F.is_zero():
            return T, Phi
        coords = jet_coords(F)
        if not coords:
            T = T + _t_antiderivative(F)
            return T, Phi
        top = _pick_top(coords)
        if top.order == 0:
            raise ReconstructionError("remainder is not a total divergence")
        A = partial(F, top)
        if depends_on(A, top):
            raise ReconstructionError(f"remainder is not linear in {top}")
        if top.x_order > 0:
            parent, d = JetCoord(top.depvar, top.t_order, top.x_order - 1), "x"
        else:
            parent, d = JetCoord(top.depvar, top.t_order - 1, top.x_order), "t"
        theta = _antiderivative(A, parent.atom)
        if d == "x":
            Phi = Phi + theta
        else:
            T = T + theta
        F = F - total_derivative(theta, d)
    raise ReconstructionError("integration by parts did not terminate")


def _jet_degree(m) -> int:
    return sum(int(e) for a, e in m if a[0] == JET)


def homotopy(F, depvars):
    """Two-dimensional homotopy operator about the zero state.

    Requires ``F`` polynomial in the jet coordinates, vanishing at zero and
    with vanishing Euler images.
    """
    F = as_expr(F)
    if has_functions(F):
        raise ReconstructionError("homotopy operator needs a polynomial integrand")
    HT, HX = JetExpr(), JetExpr()
    for v in depvars:
        for coord in jet_coords(F, v):
            k1, k2 = coord.t_order, coord.x_order
            dF = partial(F, coord)
            if k1 >= 1:
                for i1 in range(k1):
                    for i2 in range(k2 + 1):
                        b = comb(i1 + i2, i1) * comb(k1 + k2 - i1 - i2 - 1, k1 - i1 - 1)
                        term = _neg_d(dF, k1 - i1 - 1, k2 - i2)
                        HT = HT + jet(v, i1, i2) * term * b / comb(k1 + k2, k1)
            if k2 >= 1:
                for i1 in range(k1 + 1):
                    for i2 in range(k2):
                        b = comb(i1 + i2, i2) * comb(k1 + k2 - i1 - i2 - 1, k2 - i2 - 1)
                        term = _neg_d(dF, k1 - i1, k2 - i2 - 1)
                        HX = HX + jet(v, i1, i2) * term * b / comb(k1 + k2, k2)
    return _lambda_integral(HT), _lambda_integral(HX)


def _neg_d(e: JetExpr, i: int, j: int) -> JetExpr:
    for _ in range(i):
        e = -total_derivative(e, "t")
    for _ in range(j):
        e = -total_derivative(e, "x")
    return e


def _lambda_integral(e: JetExpr) -> JetExpr:
    # integral over lambda in (0, 1) of e[lambda u]/lambda: degree-d pieces get 1/d
    out = {}
    for m, c in e.terms.items():
        d = _jet_degree(m)
        if d == 0:
            raise ReconstructionError("homotopy integrand has a jet-free term")
        out[m] = c / d
    return JetExpr(out)


def base_state(sys: DiffSystem) -> dict:
    """Homotopy base state: zero, except ``p = 1`` for the inverse-cube family."""
    state = {v: JetExpr() for v in sys.depvars}
    if sys.fspec.variant == "inverse_cube" and "p" in state:
        state["p"] = JetExpr.const(1)
    return state


def _check_path(F: JetExpr, state: dict):
    values = {JetCoord(v).name: s for v, s in state.items()}
    for m in F.terms:
        for a, e in m:
            if a[0] == BASE and e < 0:
                coord = JetCoord.from_atom(a[1]).name
                if coord in values:
                    base = JetExpr.from_key(a[2]) * values[coord] + JetExpr.from_key(a[3])
                    if base.is_zero():
                        raise PathSingularity(f"base state {coord} = {values[coord]} is singular")


def flux_reconstruct(Q, sys: DiffSystem, method: str = "auto", state: dict | None = None) -> ConsLaw:
    """Recover ``(T, Phi)`` from a multiplier and verify the identity exactly."""
    Q = tuple(as_expr(q) for q in (Q if isinstance(Q, (list, tuple)) else (Q,)))
    F = _weighted_sum(Q, sys)
    state = base_state(sys) if state is None else state
    _check_path(F, state)
    if method == "auto":
        method = "parts" if has_functions(F) else "homotopy"
    if method == "homotopy":
        shift = {JetCoord(v).atom: JetCoord(v).expr() + s for v, s in state.items() if not s.is_zero()}
        back = {JetCoord(v).atom: JetCoord(v).expr() - s for v, s in state.items() if not s.is_zero()}
        Fs = _substitute(F, shift.get) if shift else F
        F0 = substitute(Fs, {c: 0 for c in jet_coords(Fs)})
        G = Fs - F0
        T, Phi = homotopy(G, sys.depvars)
        if not F0.is_zero():
            if jet_coords(F0):
                raise ReconstructionError("integrand does not vanish at the base state")
            T = T + _t_antiderivative(F0)
        if back:
            T, Phi = _substitute(T, back.get), _substitute(Phi, back.get)
    elif method == "parts":
        T, Phi = integrate_by_parts(F)
    else:
        raise ExprError(f"unknown reconstruction method {method!r}")
    law = ConsLaw(Q, T, Phi, "reconstructed")
    if not divergence_residual(law, sys).is_zero():
        raise ReconstructionError("reconstructed law fails the divergence identity")
    return law


def certify_equivalent(a: ConsLaw, b: ConsLaw, sys: DiffSystem) -> dict:
    """Check that two laws with the same multiplier differ by a trivial law."""
    same_q = len(a.Q) == len(b.Q) and all(x == y for x, y in zip(a.Q, b.Q))
    dT, dPhi = a.T - b.T, a.Phi - b.Phi
    null_div = (total_derivative(dT, "t") + total_derivative(dPhi, "x")).is_zero()
    euler_zero = all(euler_operator(dT, v).is_zero() for v in sys.depvars)
    return {"same_multiplier": same_q, "null_divergence": null_div, "density_euler_zero": euler_zero,
            "equivalent": same_q and null_div and euler_zero}


# ----------------------------------------------------------------- grid functionals


def _gradient(y, dx, periodic=False):
    """Second-order first derivative; one-sided at the ends unless periodic."""
    if periodic:
        core = y[:-1]
        g = (np.roll(core, -1) - np.roll(core, 1)) / (2.0 * dx)
        return np.append(g, g[0])
    return np.gradient(y, dx, edge_order=2)


@dataclass(frozen=True)
class ConservedQuantities:
    """Trapezoid evaluators for the four low-order conserved integrals.

    Densities and fluxes (``q = p_t``)::

        T1 = f'(p) q                 Phi1 = -c^2 p_x - beta q_x
        T2 = -f(p) + t f'(p) q       Phi2 = t Phi1
        T3 = x f'(p) q               Phi3 = c^2 (p - x p_x) + beta (q - x q_x)
        T4 = -x (f(p) - t f'(p) q)   Phi4 = t Phi3
    """

    f: FSpec
    beta: float = 1.0
    c: float = 1.0

    def densities(self, x, t, p, q):
        f0 = self.f.numeric(0, p)
        f1 = self.f.numeric(1, p)
        return np.array([f1 * q, -f0 + t * f1 * q, x * f1 * q, -x * (f0 - t * f1 * q)])

    def integrals(self, x, t, p, q):
        dens = self.densities(x, t, p, q)
        return np.array([np.trapezoid(d, x) for d in dens])

    def fluxes(self, x, t, p, q, periodic=False):
        dx = x[1] - x[0]
        px, qx = _gradient(p, dx, periodic), _gradient(q, dx, periodic)
        phi1 = -self.c ** 2 * px - self.beta * qx
        phi3 = self.c ** 2 * (p - x * px) + self.beta * (q - x * qx)
        return np.array([phi1, t * phi1, phi3, t * phi3])

    def boundary_flux(self, x, t, p, q, periodic=False):
        """Net flux ``Phi(x_max) - Phi(x_min)`` leaving the domain.

        Only the two end values are needed, so the stencils are applied there
        directly (second-order one-sided, or central when periodic).
        """
        dx = x[1] - x[0]
        if periodic:
            px0 = (p[1] - p[-2]) / (2.0 * dx)
            qx0 = (q[1] - q[-2]) / (2.0 * dx)
            pxs, qxs = (px0, px0), (qx0, qx0)
        else:
            pxs = ((-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * dx),
                   (3.0 * p[-1] - 4.0 * p[-2] + p[-3]) / (2.0 * dx))
            qxs = ((-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dx),
                   (3.0 * q[-1] - 4.0 * q[-2] + q[-3]) / (2.0 * dx))
        out = np.zeros(4)
        c2, beta = self.c ** 2, self.beta
        for sign, idx, px, qx in ((-1.0, 0, pxs[0], qxs[0]), (1.0, -1, pxs[1], qxs[1])):
            xe = x[idx]
            phi1 = -c2 * px - beta * qx
            phi3 = c2 * (p[idx] - xe * px) + beta * (q[idx] - xe * qx)
            out += sign * np.array([phi1, t * phi1, phi3, t * phi3])
        return out


def conserved_quantities(f: FSpec, beta=1.0, c=1.0) -> ConservedQuantities:
    if f.is_generic:
        raise ExprError("conserved quantities need a concrete f")
    return ConservedQuantities(f, float(beta), float(c))
