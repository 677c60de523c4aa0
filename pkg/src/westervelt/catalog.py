"""Published symmetry, multiplier and conservation-law data as checkable text.

Everything here is plain strings in the parser syntax so the catalogue can
be read (and mutated) without touching the engine.  Identifiers describe
what an entry is, e.g. ``pot2.l1/scaling``.

Family-dependent entries mention ``q``, ``p0``, ``k`` (or ``v0`` for the
second layer of the second potential system, whose family is written in
terms of ``v_t/c^2``).  They are checked at exact rational samples and, in
addition, with ``k`` and the base shift left symbolic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

# (q, p0, k) samples for the power law; the inverse cube uses (p0, k)
POWER_LAW_SAMPLES = (
    (Fraction(2), Fraction(0), Fraction(1)),
    (Fraction(-4), Fraction(2, 5), Fraction(3)),
    (Fraction(1, 2), Fraction(-3, 7), Fraction(-5, 2)),
)
INVERSE_CUBE_SAMPLES = tuple((p0, k) for _, p0, k in POWER_LAW_SAMPLES)


@dataclass(frozen=True)
class SymmetryEntry:
    id: str
    group: str
    system: str
    components: tuple  # ((depvar, text), ...)
    family: str = "generic"  # generic | power_law | inverse_cube
    projection: str | None = None  # expected P^p for the second potential system

    @property
    def component_map(self) -> dict:
        return dict(self.components)


@dataclass(frozen=True)
class LawEntry:
    id: str
    group: str
    system: str
    Q: tuple
    T: str
    Phi: str
    note: str = ""


@dataclass(frozen=True)
class MultiplierEntry:
    id: str
    group: str
    system: str
    basis: tuple  # tuple of multiplier vectors (tuples of text)


@dataclass(frozen=True)
class BracketEntry:
    id: str
    left: str
    right: str
    expected: tuple  # ((generator name, coefficient text), ...)
    bindings: dict = field(default_factory=dict, compare=False, hash=False)


def _sym(id_, group, system, family="generic", projection=None, **comps):
    return SymmetryEntry(id_, group, system, tuple(comps.items()), family, projection)


# generators on (t, x, p); X3 belongs to the power law, X4 to the inverse cube
GENERATORS = {
    "X1": {"tau": "1"},
    "X2": {"xi": "1"},
    "X3": {"xi": "q*x", "p": "-2*(p+p0)"},
    "X4": {"xi": "x^2", "p": "x*(p+p0)"},
}

SYMMETRIES = (
    # main equation
    _sym("westervelt/time-translation", "point-symmetries", "westervelt", p="-p_t"),
    _sym("westervelt/space-translation", "point-symmetries", "westervelt", p="-p_x"),
    _sym("westervelt/scaling", "point-symmetries", "westervelt", "power_law", p="-2*(p+p0) - q*x*p_x"),
    _sym("westervelt/nonrigid-scaling", "point-symmetries", "westervelt", "inverse_cube",
         p="x*(p+p0) - x^2*p_x"),
    # first potential system, first layer
    _sym("pot1.l1/time-translation", "pot1-l1-symmetries", "pot1.l1", p="-p_t", u="-u_t"),
    _sym("pot1.l1/space-translation", "pot1-l1-symmetries", "pot1.l1", p="-p_x", u="-u_x"),
    _sym("pot1.l1/u-translation", "pot1-l1-symmetries", "pot1.l1", p="0", u="1"),
    _sym("pot1.l1/scaling", "pot1-l1-symmetries", "pot1.l1", "power_law",
         p="-2*(p+p0) - q*x*p_x", u="-(q+2)*u - q*x*u_x"),
    # first potential system, second layer
    _sym("pot1.l2/time-translation", "pot1-l2-symmetries", "pot1.l2",
         p="-p_t", u="-u_t", v="-v_t", w="-w_t"),
    _sym("pot1.l2/space-translation", "pot1-l2-symmetries", "pot1.l2",
         p="-p_x", u="-u_x", v="-v_x", w="-w_x"),
    _sym("pot1.l2/v-translation", "pot1-l2-symmetries", "pot1.l2", p="0", u="0", v="1", w="0"),
    _sym("pot1.l2/w-translation", "pot1-l2-symmetries", "pot1.l2", p="0", u="0", v="0", w="1"),
    _sym("pot1.l2/u-translation-with-shifts", "pot1-l2-symmetries", "pot1.l2",
         p="0", u="1", v="t", w="x"),
    _sym("pot1.l2/scaling", "pot1-l2-symmetries", "pot1.l2", "power_law",
         p="-2*(p+p0) - q*x*p_x", u="-(q+2)*u - q*x*u_x", v="-(q+2)*v - q*x*v_x",
         w="-2*(c^2*p0*t + w) - q*x*w_x"),
    # second potential system, first layer
    _sym("pot2.l1/time-translation", "pot2-l1-symmetries", "pot2.l1", projection="-p_t", v="-v_t"),
    _sym("pot2.l1/space-translation", "pot2-l1-symmetries", "pot2.l1", projection="-p_x", v="-v_x"),
    _sym("pot2.l1/v-translation", "pot2-l1-symmetries", "pot2.l1", projection="0", v="1"),
    _sym("pot2.l1/v-shift-in-x", "pot2-l1-symmetries", "pot2.l1", projection="0", v="x"),
    _sym("pot2.l1/scaling", "pot2-l1-symmetries", "pot2.l1", "power_law",
         projection="-2*(p+p0) - q*x*p_x", v="-2*(c^2*p0*t + v) - q*x*v_x"),
    _sym("pot2.l1/nonrigid-scaling", "pot2-l1-symmetries", "pot2.l1", "inverse_cube",
         projection="x*(p+p0) - x^2*p_x", v="x*(c^2*p0*t + v) - x^2*v_x"),
    # second potential system, second layer
    _sym("pot2.l2/time-translation", "pot2-l2-symmetries", "pot2.l2", projection="-p_t", w="-w_t"),
    _sym("pot2.l2/space-translation", "pot2-l2-symmetries", "pot2.l2", projection="-p_x", w="-w_x"),
    _sym("pot2.l2/w-translation", "pot2-l2-symmetries", "pot2.l2", projection="0", w="1"),
    _sym("pot2.l2/w-shift-in-x", "pot2-l2-symmetries", "pot2.l2", projection="0", w="x"),
    _sym("pot2.l2/w-shift-in-t", "pot2-l2-symmetries", "pot2.l2", projection="0", w="t"),
    _sym("pot2.l2/w-shift-in-tx", "pot2-l2-symmetries", "pot2.l2", projection="0", w="t*x"),
    _sym("pot2.l2/scaling", "pot2-l2-symmetries", "pot2.l2", "power_law",
         projection="-2*(v0*c^(-2) + p) - q*x*p_x", w="-(v0*t^2 + 2*w) - q*x*w_x"),
    _sym("pot2.l2/nonrigid-scaling", "pot2-l2-symmetries", "pot2.l2", "inverse_cube",
         projection="2*x*(v0*c^(-2) + p) - 2*x^2*p_x", w="x*(v0*t^2 + 2*w) - 2*x^2*w_x"),
)

NONLOCAL = "nonlocal terms written through the potential"

LAWS = (
    LawEntry("westervelt/net-mass-rate", "conservation-laws", "westervelt",
             ("1",), "f'(p)*p_t", "-c^2*p_x - beta*p_tx"),
    LawEntry("westervelt/net-mass", "conservation-laws", "westervelt",
             ("t",), "-f(p) + t*f'(p)*p_t", "-t*(c^2*p_x + beta*p_tx)"),
    LawEntry("westervelt/weighted-mass-rate", "conservation-laws", "westervelt",
             ("x",), "x*f'(p)*p_t", "c^2*(p - x*p_x) + beta*(p_t - x*p_tx)"),
    LawEntry("westervelt/weighted-mass", "conservation-laws", "westervelt",
             ("t*x",), "-x*(f(p) - t*f'(p)*p_t)", "c^2*t*(p - x*p_x) + beta*t*(p_t - x*p_tx)"),
    # nonlocal densities written through the potential: d_x^{-1}(f(p)_t) = u + mu p_x
    LawEntry("pot1.l1/mass", "pot1-l1-laws", "pot1.l1",
             ("1", "0"), "f(p)", "-mu*p_x - u"),
    LawEntry("pot1.l1/potential-density", "pot1-l1-laws", "pot1.l1",
             ("0", "1"), "-(u + mu*p_x)", "c^2*p + beta*p_t", NONLOCAL),
    LawEntry("pot1.l1/weighted", "pot1-l1-laws", "pot1.l1",
             ("x", "-t"), "x*f(p) + t*(u + mu*p_x)", "-c^2*t*p - beta*t*p_t - x*(u + mu*p_x)", NONLOCAL),
    LawEntry("pot1.l2/v-density", "pot1-l2-law", "pot1.l2",
             ("0", "-1", "0", "1"), "v", "-(mu + sigma)*p - w",
             "v_t equation read as mu p_x + u - v_t = 0"),
    LawEntry("pot2.l1/mass", "pot2-l1-laws", "pot2.l1",
             ("1", "0"), "f(p)", "-beta*p_x - v_x", NONLOCAL),
    LawEntry("pot2.l1/weighted-mass", "pot2-l1-laws", "pot2.l1",
             ("x", "0"), "x*f(p)", "beta*(p - x*p_x) + v - x*v_x", NONLOCAL),
)

MULTIPLIERS = (
    MultiplierEntry("westervelt/multipliers", "multipliers", "westervelt",
                    (("1",), ("t",), ("x",), ("t*x",))),
    MultiplierEntry("pot1.l1/multipliers", "pot1-l1-multipliers", "pot1.l1",
                    (("1", "0"), ("0", "1"), ("x", "-t"))),
    MultiplierEntry("pot1.l2/multipliers", "pot1-l2-multipliers", "pot1.l2",
                    (("0", "-1", "0", "1"),)),
    MultiplierEntry("pot2.l1/multipliers", "pot2-l1-multipliers", "pot2.l1",
                    (("1", "0"), ("x", "0"))),
    MultiplierEntry("pot2.l2/multipliers", "pot2-l2-multipliers", "pot2.l2", ()),
)

BRACKETS = (
    BracketEntry("bracket/X1-X2", "X1", "X2", ()),
    BracketEntry("bracket/X1-X3", "X1", "X3", ()),
    BracketEntry("bracket/X1-X4", "X1", "X4", (), {"q": -4}),
    BracketEntry("bracket/X2-X3", "X2", "X3", (("X2", "q"),)),
    BracketEntry("bracket/X2-X4", "X2", "X4", (("X3", "-1/2"),), {"q": -4}),
    BracketEntry("bracket/X3-X4", "X3", "X4", (("X4", "-4"),), {"q": -4}),
)

# flux reconstruction checks: (id, system, multiplier, id of the law it should match)
RECONSTRUCTIONS = (
    ("westervelt/reconstruct-net-mass-rate", "westervelt", ("1",), "westervelt/net-mass-rate"),
    ("westervelt/reconstruct-weighted-mass-rate", "westervelt", ("x",), "westervelt/weighted-mass-rate"),
    ("pot1.l1/reconstruct-potential-density", "pot1.l1", ("0", "1"), "pot1.l1/potential-density"),
)

# symmetry searches: (id, system, family, degree, ids of the entries the basis must span)
SEARCHES = (
    ("search/generic", "westervelt", "generic", 1,
     ("westervelt/time-translation", "westervelt/space-translation")),
    ("search/power-law", "westervelt", "power_law", 1,
     ("westervelt/time-translation", "westervelt/space-translation", "westervelt/scaling")),
    ("search/inverse-cube", "westervelt", "inverse_cube", 2,
     ("westervelt/time-translation", "westervelt/space-translation", "westervelt/scaling",
      "westervelt/nonrigid-scaling")),
)

# residuals that must NOT vanish
NEGATIVE_CONTROLS = (
    ("control/non-symmetry", "westervelt", "symmetry", ("p",)),
    ("control/non-multiplier", "westervelt", "multiplier", ("p",)),
)

GROUPS = (
    "point-symmetries", "commutators", "multipliers", "conservation-laws",
    "pot1-l1-symmetries", "pot1-l1-multipliers", "pot1-l1-laws",
    "pot1-l2-symmetries", "pot1-l2-multipliers", "pot1-l2-law",
    "pot2-l1-symmetries", "pot2-l1-projections", "pot2-l1-multipliers", "pot2-l1-laws",
    "pot2-l2-symmetries", "pot2-l2-projections", "pot2-l2-multipliers",
    "symmetry-search", "flux-reconstruction", "negative-controls", "shock-profile",
)

LAW_GROUPS = tuple(g for g in GROUPS if g.endswith(("laws", "law", "multipliers")) or g == "flux-reconstruction")


def symmetry(id_: str) -> SymmetryEntry:
    for s in SYMMETRIES:
        if s.id == id_:
            return s
    raise KeyError(id_)


def law(id_: str) -> LawEntry:
    for entry in LAWS:
        if entry.id == id_:
            return entry
    raise KeyError(id_)


def _random_rational(rng: random.Random, avoid=()) -> Fraction:
    while True:
        r = Fraction(rng.randint(-9, 9), rng.randint(1, 7))
        if r not in avoid:
            return r


def power_law_samples(count: int = 3, seed: int = 0) -> list:
    """``count`` (q, p0, k) triples: the fixed ones first, then seeded random draws."""
    out = list(POWER_LAW_SAMPLES[:count])
    rng = random.Random(seed)
    while len(out) < count:
        out.append((_random_rational(rng, (-1, 0)), _random_rational(rng), _random_rational(rng, (0,))))
    return out


def inverse_cube_samples(count: int = 3, seed: int = 0) -> list:
    return [(p0, k) for _, p0, k in power_law_samples(count, seed)]
