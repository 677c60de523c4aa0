"""Travelling fronts ``p = U(x - nu t)`` for ``f(p) = p + h(p)``.

Substituting the travelling ansatz gives a third-order ODE in U which
integrates twice to a first-order separable equation.  With ``h = kappa U^n``
and zero integration constants that equation is of Bernoulli type and has
the monotone front

    U(xi) = (A / (U0 A exp(-lam (xi - xi0)) + kappa nu^2))^(1/(n-1)),
    A = c^2 - nu^2,   lam = A (n-1) / (beta nu).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .families import FSpec
from .kernel import ExprError, JetExpr, as_expr, func, jet, param
from .quadrature import adaptive_simpson


class ShockDomainError(ValueError):
    """Parameters outside the non-singular shock branch."""


class EquilibriumCrossing(ValueError):
    """Quadrature interval touches a zero of the integrand denominator."""


@dataclass(frozen=True)
class TWParams:
    c: float = 2.0
    nu: float = 1.0
    beta: float = 1.0
    kappa: float = 1.0
    n: float = 2.0
    U0: float = 1.0
    xi0: float = 0.0
    C0: float = 0.0
    C1: float = 0.0

    def __post_init__(self):
        if self.beta * self.nu == 0:
            raise ShockDomainError("beta * nu must be nonzero")

    @property
    def A(self) -> float:
        return self.c ** 2 - self.nu ** 2

    @property
    def rate(self) -> float:
        return self.A * (self.n - 1) / (self.beta * self.nu)

    def check_shock(self):
        if not self.n > 1:
            raise ShockDomainError("shock branch needs n > 1")
        if not self.U0 > 0:
            raise ShockDomainError("shock branch needs U0 > 0")
        if not self.A > 0:
            raise ShockDomainError("shock branch needs c^2 - nu^2 > 0")
        if not self.kappa > 0:
            raise ShockDomainError("shock branch needs kappa > 0")
        if self.C0 != 0 or self.C1 != 0:
            raise ShockDomainError("closed form assumes zero integration constants")

    def h(self) -> FSpec:
        return FSpec.monomial(_exact(self.kappa), _exact(self.n))


def _exact(value):
    from fractions import Fraction

    return Fraction(repr(float(value))) if isinstance(value, float) else value


def amplitude(p: TWParams) -> float:
    """Upper equilibrium ``(A / (kappa nu^2))^(1/(n-1))``."""
    p.check_shock()
    return (p.A / (p.kappa * p.nu ** 2)) ** (1.0 / (p.n - 1))


def _logs(xi, p: TWParams):
    xi = np.asarray(xi, dtype=float)
    log_e = math.log(p.U0 * p.A) - p.rate * (xi - p.xi0)
    log_d = np.logaddexp(log_e, math.log(p.kappa * p.nu ** 2))
    return log_e, log_d


def shock_closed_form(xi, p: TWParams):
    """U(xi) on the shock branch, computed in log form so it never overflows."""
    p.check_shock()
    _, log_d = _logs(xi, p)
    a = 1.0 / (p.n - 1)
    out = np.exp(a * (math.log(p.A) - log_d))
    return float(out) if np.ndim(out) == 0 else out


def shock_derivatives(xi, p: TWParams, order: int = 3) -> list:
    """``[U, U', ..., U^(order)]`` from the exact closed form.

    With ``E = U0 A exp(-lam xi)`` and ``D = E + kappa nu^2`` every
    derivative is a sum of ``coef * E^i D^j`` terms, and
    ``d(E^i D^j) = -lam (i E^i D^j + j E^(i+1) D^(j-1))``.
    """
    p.check_shock()
    log_e, log_d = _logs(xi, p)
    out = []
    for terms in _derivative_terms(1.0 / (p.n - 1), p.rate, p.A, order):
        val = 0.0
        for i, j, coef in terms:
            val = val + coef * np.exp(i * log_e + j * log_d)
        out.append(float(val) if np.ndim(val) == 0 else val)
    return out


@lru_cache(maxsize=64)
def _derivative_terms(a: float, lam: float, A: float, order: int) -> tuple:
    terms = {(0, -a): A ** a}
    out = []
    for _ in range(order + 1):
        out.append(tuple((i, j, c) for (i, j), c in terms.items()))
        nxt: dict = {}
        for (i, j), coef in terms.items():
            if i:
                nxt[(i, j)] = nxt.get((i, j), 0.0) - lam * i * coef
            nxt[(i + 1, j - 1)] = nxt.get((i + 1, j - 1), 0.0) - lam * j * coef
        terms = nxt
    return tuple(out)


# ----------------------------------------------------------------- ODE forms


def tw_substitute(e, nu) -> JetExpr:
    """Map ``p_(i,j)`` to ``(-nu)^i U^(i+j)``, writing U derivatives as ``p_x...``."""
    from .kernel import jet_coords, substitute

    e = as_expr(e)
    nu = as_expr(nu)
    return substitute(e, {c: (-nu) ** c.t_order * jet("p", 0, c.order) for c in jet_coords(e)
                          if c.t_order})


@dataclass(frozen=True)
class ODEDescriptor:
    """Both ODE forms, with U^(k) written as the jet ``p_x..x`` (k x's)."""

    third_order: JetExpr
    first_order: JetExpr
    h: FSpec

    def twice_differentiated_gap(self) -> JetExpr:
        """``D^2(first_order) - third_order``; zero exactly when ``C1 = 0``."""
        from .kernel import total_derivative

        return total_derivative(total_derivative(self.first_order, "x"), "x") - self.third_order


def reduce_to_ode(h: FSpec | None = None, params: dict | None = None) -> ODEDescriptor:
    """Travelling reduction of the PDE with ``f = p + h``.

    ``params`` may bind ``nu``, ``c``, ``beta``, ``C0``, ``C1`` to numbers;
    unbound ones stay symbolic (the integration constants default to 0).
    """
    h = h or FSpec.generic("h")
    params = dict(params or {})
    U = jet("p")
    if not h.is_generic and h.derivative(2, U).is_zero():
        raise ExprError("h must be genuinely nonlinear (h'' != 0)")
    nu = as_expr(params["nu"]) if "nu" in params else param("nu")
    c = as_expr(params["c"]) if "c" in params else param("c")
    beta = as_expr(params["beta"]) if "beta" in params else param("beta")
    C0 = as_expr(params.get("C0", 0))
    C1 = as_expr(params.get("C1", 0))
    hd = (lambda k: func("h", k, U)) if h.is_generic else (lambda k: h.derivative(k, U))
    p_t, p_tt = jet("p", 1, 0), jet("p", 2, 0)
    pde = (1 + hd(1)) * p_tt + hd(2) * p_t ** 2 - beta * jet("p", 1, 2) - c ** 2 * jet("p", 0, 2)
    third = tw_substitute(pde, nu)
    U1 = jet("p", 0, 1)
    first = beta * nu * U1 + (nu ** 2 - c ** 2) * U + nu ** 2 * hd(0) + C1 * U + C0
    return ODEDescriptor(third, first, h)


def _h_numeric(p: TWParams, h: FSpec | None):
    if h is None:
        return lambda u: p.kappa * u ** p.n
    return lambda u: float(h.numeric(0, u))


def denominator(U, p: TWParams, h: FSpec | None = None):
    hn = _h_numeric(p, h)
    return (p.nu ** 2 - p.c ** 2) * U + p.nu ** 2 * hn(U) + p.C1 * U + p.C0


def _roots_near(lo, hi, p, h, scale, samples=4001):
    """Zeros of the denominator in a slightly padded interval."""
    pad = 1e-6 * scale
    grid = np.linspace(lo - pad, hi + pad, samples)
    vals = np.array([denominator(u, p, h) for u in grid])
    roots = list(grid[vals == 0.0])
    sign = np.sign(vals)
    roots += list(grid[:-1][sign[:-1] * sign[1:] < 0])
    return roots


def quadrature_xi(U_from: float, U_to: float, p: TWParams, h: FSpec | None = None,
                  tol: float = 1e-10) -> float:
    """``xi(U_to) - xi(U_from)`` from the separable first-order ODE.

    Along a solution ``d xi = -beta nu dU / den(U)``, so the returned value
    is minus the integral of ``beta nu / den``.
    """
    if U_from == U_to:
        return 0.0
    lo, hi = sorted((U_from, U_to))
    try:
        scale = amplitude(p)
    except ShockDomainError:
        scale = max(abs(lo), abs(hi), 1.0)
    if _roots_near(lo, hi, p, h, scale):
        raise EquilibriumCrossing(f"denominator vanishes in [{lo}, {hi}]")
    for end in (lo, hi):
        if abs(denominator(end, p, h)) < 1e-12:
            raise EquilibriumCrossing(f"endpoint {end} is an equilibrium")
    integrand = lambda u: p.beta * p.nu / denominator(u, p, h)
    return -adaptive_simpson(integrand, U_from, U_to, tol)


def residual_check(p: TWParams, xis) -> float:
    """Max |beta nu U' + nu^2 kappa U^n + (nu^2 - c^2) U| over ``xis``."""
    U, U1 = shock_derivatives(np.asarray(xis, dtype=float), p, 1)
    r = p.beta * p.nu * U1 + p.nu ** 2 * p.kappa * U ** p.n + (p.nu ** 2 - p.c ** 2) * U
    return float(np.max(np.abs(r)))


def third_order_residual(p: TWParams, xis) -> float:
    """Max residual of the third-order travelling ODE with h = kappa U^n."""
    U, U1, U2, U3 = shock_derivatives(np.asarray(xis, dtype=float), p, 3)
    k, n = p.kappa, p.n
    h1 = k * n * U ** (n - 1)
    h2 = k * n * (n - 1) * U ** (n - 2)
    r = p.beta * p.nu * U3 + (p.nu ** 2 - p.c ** 2) * U2 + p.nu ** 2 * (h1 * U2 + h2 * U1 ** 2)
    return float(np.max(np.abs(r)))


def profile_table(p: TWParams, xis, times=None) -> list:
    """Rows ``(xi, U)``, or ``(t, x, U(x - nu t))`` when ``times`` is given."""
    xis = np.asarray(xis, dtype=float)
    if times is None:
        return list(zip(xis.tolist(), np.atleast_1d(shock_closed_form(xis, p)).tolist()))
    rows = []
    for t in times:
        U = np.atleast_1d(shock_closed_form(xis - p.nu * t, p))
        rows.extend((float(t), float(x), float(u)) for x, u in zip(xis, U))
    return rows


def write_profile(path, rows, spacetime: bool = False):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "U"] if spacetime else ["xi", "U"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    return path
