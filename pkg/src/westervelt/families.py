"""Concrete choices for the constitutive function f (and h).

Each family gives symbolic derivatives as jet expressions and numeric
derivatives for the simulator.  Parameters such as ``k`` or ``p0`` may be
exact rationals or left symbolic (a parameter expression).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from .kernel import ExprError, JetExpr, as_expr, expr_pow, func, to_rational

VARIANTS = ("generic", "power_law", "inverse_cube", "westervelt_poly", "monomial", "linear")


class FamilyConstraintError(ExprError):
    pass


def _falling(a, m: int):
    out = mpq(1)
    for i in range(m):
        out *= a - i
    return out


def _as_param_expr(value) -> JetExpr:
    e = as_expr(value)
    if not e.is_constant():
        raise FamilyConstraintError(f"family parameter must be constant, got {e}")
    return e


def _numeric_value(e: JetExpr, values: dict | None):
    r = e.rational_value()
    if r is not None:
        return float(r)
    from .kernel import eval_numeric

    if not values:
        raise FamilyConstraintError(f"symbolic family parameter {e} needs a numeric value")
    return eval_numeric(e, values)


@dataclass(frozen=True)
class FSpec:
    """A constitutive function.

    ``variant`` is one of ``VARIANTS``.  Meaning of the fields:

    * power_law:        f(y) = k (y + p0)^(1+q)
    * inverse_cube:     f(y) = k (y + p0)^(-3)
    * westervelt_poly:  f(y) = y + kappa y^n
    * monomial:         h(y) = kappa y^n
    * linear:           f(y) = y (degenerate; only a simulator test hook)
    * generic:          f is an arbitrary function symbol
    """

    variant: str = "generic"
    k: object = 1
    p0: object = 0
    q: object = None
    kappa: object = None
    n: object = None
    name: str = "f"
    values: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise FamilyConstraintError(f"unknown family {self.variant!r}")
        if self.variant == "power_law":
            if self.q is None:
                raise FamilyConstraintError("power law needs q")
            q = to_rational(self.q)
            if q in (-1, 0):
                raise FamilyConstraintError("power law exponent q must avoid -1 and 0")
            object.__setattr__(self, "q", q)
        if self.variant == "inverse_cube":
            object.__setattr__(self, "q", mpq(-4))
        if self.variant in ("westervelt_poly", "monomial"):
            if self.kappa is None or self.n is None:
                raise FamilyConstraintError(f"{self.variant} needs kappa and n")
            n = to_rational(self.n)
            kappa = to_rational(self.kappa)
            if self.variant == "westervelt_poly" and not (n > 1 and kappa > 0):
                raise FamilyConstraintError("polynomial family needs n > 1 and kappa > 0")
            if self.variant == "monomial" and kappa == 0:
                raise FamilyConstraintError("monomial family needs kappa != 0")
            object.__setattr__(self, "n", n)
            object.__setattr__(self, "kappa", kappa)
        if self.variant in ("power_law", "inverse_cube"):
            object.__setattr__(self, "k", _as_param_expr(self.k))
            object.__setattr__(self, "p0", _as_param_expr(self.p0))
            if self.k.is_zero():
                raise FamilyConstraintError("power law needs k != 0")

    # constructors
    @classmethod
    def generic(cls, name="f"):
        return cls("generic", name=name)

    @classmethod
    def power_law(cls, k=1, p0=0, q=2, **kw):
        return cls("power_law", k=k, p0=p0, q=q, **kw)

    @classmethod
    def inverse_cube(cls, k=1, p0=0, **kw):
        return cls("inverse_cube", k=k, p0=p0, **kw)

    @classmethod
    def westervelt_poly(cls, kappa, n=2):
        return cls("westervelt_poly", kappa=kappa, n=n)

    @classmethod
    def monomial(cls, kappa, n=2):
        return cls("monomial", kappa=kappa, n=n, name="h")

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def from_dict(cls, cfg: dict):
        cfg = dict(cfg)
        variant = cfg.pop("variant", cfg.pop("family", "generic"))
        fields_ = {k: v for k, v in cfg.items() if k in ("k", "p0", "q", "kappa", "n", "name")}
        for key, val in list(fields_.items()):
            if isinstance(val, float):
                # read floats through their decimal text so 0.1 stays 1/10
                fields_[key] = mpq(Fraction(repr(val)))
        return cls(variant, **fields_)

    @property
    def is_generic(self) -> bool:
        return self.variant == "generic"

    def exponent(self):
        """Exponent of the base power for the power-law variants."""
        return 1 + self.q

    # symbolic
    def derivative(self, order: int, argument) -> JetExpr:
        """``f^(order)(argument)`` as a jet expression."""
        arg = as_expr(argument)
        v = self.variant
        if v == "generic":
            return func(self.name, order, arg)
        if v == "linear":
            return arg if order == 0 else (JetExpr.const(1) if order == 1 else JetExpr.const(0))
        if v in ("power_law", "inverse_cube"):
            a = 1 + self.q
            ff = _falling(a, order)
            if ff == 0:
                return JetExpr.const(0)
            return self.k * ff * expr_pow(arg + self.p0, a - order)
        n, kappa = self.n, self.kappa
        if v == "westervelt_poly":
            poly = kappa * _falling(n, order) * expr_pow(arg, n - order) if _falling(n, order) else JetExpr.const(0)
            if order == 0:
                return arg + poly
            if order == 1:
                return 1 + poly
            return poly
        ff = _falling(n, order)
        return kappa * ff * expr_pow(arg, n - order) if ff else JetExpr.const(0)

    __call__ = derivative

    # numeric
    def numeric(self, order: int, y):
        """Numeric derivative of order ``order`` at ``y`` (float or array)."""
        v = self.variant
        y = np.asarray(y, dtype=float) if not np.isscalar(y) else float(y)
        if v == "generic":
            raise FamilyConstraintError("generic f has no numeric values")
        if v == "linear":
            out = y if order == 0 else (1.0 if order == 1 else 0.0)
            return out * np.ones_like(y) if not np.isscalar(y) else out
        scale, shift, expo = self._numeric_constants(order)
        poly = scale * np.power(y + shift, expo) if scale else 0.0 * y
        if v == "westervelt_poly":
            if order == 0:
                return y + poly
            if order == 1:
                return 1.0 + poly
        return poly

    @lru_cache(maxsize=None)
    def _numeric_constants(self, order: int):
        """``(scale, shift, exponent)`` with f^(order)(y) = scale (y + shift)^exponent (+ linear part)."""
        if self.variant in ("power_law", "inverse_cube"):
            a = 1 + self.q
            k = _numeric_value(self.k, self.values)
            p0 = _numeric_value(self.p0, self.values)
            return k * float(_falling(a, order)), p0, float(a - order)
        ff = float(_falling(self.n, order))
        return float(self.kappa) * ff, 0.0, float(self.n - order)

    def describe(self) -> str:
        if self.variant == "generic":
            return f"{self.name} generic"
        if self.variant == "power_law":
            return f"power law k={self.k} p0={self.p0} q={self.q}"
        if self.variant == "inverse_cube":
            return f"inverse cube k={self.k} p0={self.p0}"
        if self.variant == "westervelt_poly":
            return f"p + {self.kappa} p^{self.n}"
        if self.variant == "monomial":
            return f"{self.kappa} p^{self.n}"
        return "linear"
