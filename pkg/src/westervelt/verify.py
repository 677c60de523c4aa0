"""Run the catalogue of claims and collect PASS/FAIL rows.

Each row records the system, the claim id, whether the residual vanished,
a short residual summary and the parameter samples used.  Mutations
(``flip-phi1``, ``perturb:<id>``, ``perturb-all``) corrupt catalogue
entries on purpose so the negative path of the checker can be exercised.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import catalog
from .conslaw import (
    ConsLaw,
    certify_equivalent,
    divergence_residual,
    find_multipliers,
    flux_reconstruct,
    multiplier_in_span,
    multiplier_residual,
)
from .families import FSpec
from .kernel import JetExpr, param, substitute, to_string
from .parser import parse
from .symmetry import (
    Generator,
    characteristic_in_span,
    lie_bracket,
    project_pot2,
    symmetry_residual,
    symmetry_search,
)
from .systems import SYSTEM_NAMES, build_system
from . import tws

PERTURBATION = "x^2"
DETERMINING_NOTE = "determining equation taken as the linearization D_t^2(f'(p) P) - beta D_t D_x^2 P - c^2 D_x^2 P"


@dataclass
class ClaimResult:
    group: str
    claim: str
    system: str
    passed: bool
    residual: str = "0"
    samples: str = "symbolic"
    notes: str = ""
    zero: bool | None = None  # did the residual vanish; None means "same as passed"

    @property
    def residual_zero(self) -> bool:
        return self.passed if self.zero is None else self.zero

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class VerifyOptions:
    systems: tuple = ()  # empty means all
    groups: tuple = ()  # empty means all
    laws_only: bool = False
    samples: int = 3
    seed: int = 0
    symbolic: bool = True
    mutations: tuple = ()
    include_numeric: bool = True


@dataclass
class Report:
    results: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    @property
    def ok(self) -> bool:
        return bool(self.results) and self.failed == 0


# ----------------------------------------------------------------- helpers


def _summary(residuals) -> str:
    nz = [r for r in residuals if not r.is_zero()]
    if not nz:
        return "0"
    text = to_string(nz[0])
    if len(text) > 70:
        text = text[:67] + "..."
    return f"{len(nz)} nonzero ({len(nz[0])} terms): {text}"


def _fmt(r: Fraction) -> str:
    return str(r)


def _q_bindings(q, p0=None, k=None, v0_mode=False) -> dict:
    out = {"q": q}
    if p0 is not None:
        out["v0" if v0_mode else "p0"] = p0
    if k is not None:
        out["k"] = k
    return out


def _bind(text: str, bindings: dict) -> JetExpr:
    e = parse(text)
    return substitute(e, bindings) if bindings else e


def _family_cases(family: str, opts: VerifyOptions, v0_mode: bool = False):
    """``(label, FSpec, bindings)`` for every sample of a family."""
    base = "v0*c^(-2)" if v0_mode else "p0"
    shift_name = "v0" if v0_mode else "p0"
    if family == "generic":
        yield "generic f", FSpec.generic(), {}
        return
    if family == "power_law":
        samples = catalog.power_law_samples(opts.samples, opts.seed)
        for q, p0, k in samples:
            b = _q_bindings(q, p0, k, v0_mode)
            yield (f"q={_fmt(q)},{shift_name}={_fmt(p0)},k={_fmt(k)}",
                   FSpec.power_law(k, _bind(base, b), q), b)
        if opts.symbolic:
            for q, _, _ in samples:
                yield f"q={_fmt(q)},{shift_name},k symbolic", FSpec.power_law("k", parse(base), q), {"q": q}
        return
    if family == "inverse_cube":
        samples = catalog.inverse_cube_samples(opts.samples, opts.seed)
        for p0, k in samples:
            b = _q_bindings(-4, p0, k, v0_mode)
            yield f"{shift_name}={_fmt(p0)},k={_fmt(k)}", FSpec.inverse_cube(k, _bind(base, b)), b
        if opts.symbolic:
            yield f"{shift_name},k symbolic", FSpec.inverse_cube("k", parse(base)), {"q": -4}
        return
    raise ValueError(f"unknown family {family!r}")


class _Systems:
    def __init__(self):
        self._cache = {}

    def get(self, name: str, f: FSpec):
        key = (name, f)
        if key not in self._cache:
            self._cache[key] = build_system(name, f=f)
        return self._cache[key]


def _mutation_targets(opts: VerifyOptions):
    flip = "flip-phi1" in opts.mutations
    perturb_all = "perturb-all" in opts.mutations
    perturb = {m.split(":", 1)[1] for m in opts.mutations if m.startswith("perturb:")}
    unknown = [m for m in opts.mutations
               if m not in ("flip-phi1", "perturb-all") and not m.startswith("perturb:")]
    if unknown:
        raise ValueError(f"unknown mutation(s): {unknown}")
    ids = {s.id for s in catalog.SYMMETRIES}
    missing = perturb - ids
    if missing:
        raise ValueError(f"cannot perturb unknown characteristic(s): {sorted(missing)}")
    return flip, perturb_all, perturb


def _selected(group: str, system: str, opts: VerifyOptions) -> bool:
    if opts.systems and system not in opts.systems:
        return False
    if opts.groups and group not in opts.groups:
        return False
    if opts.laws_only and group not in catalog.LAW_GROUPS:
        return False
    return True


# ----------------------------------------------------------------- checks


def check_symmetry(entry, systems: _Systems, opts: VerifyOptions, perturb: bool = False) -> list:
    v0_mode = entry.system == "pot2.l2"
    rows = []
    cases = list(_family_cases(entry.family, opts, v0_mode))
    labels, bad = [], None
    for label, f, b in cases:
        sys = systems.get(entry.system, f)
        P = {v: _bind(text, b) for v, text in entry.components}
        if perturb:
            first = entry.components[0][0]
            P[first] = P[first] + parse(PERTURBATION)
        res = symmetry_residual(sys, P)
        labels.append(label)
        if bad is None and any(not r.is_zero() for r in res):
            bad = (label, res)
    notes = "perturbed by " + PERTURBATION if perturb else ""
    if entry.system == "westervelt":
        notes = "; ".join(n for n in (notes, DETERMINING_NOTE) if n)
    rows.append(ClaimResult(entry.group, entry.id, entry.system, bad is None,
                            "0" if bad is None else f"[{bad[0]}] " + _summary(bad[1]),
                            "; ".join(labels), notes))
    if entry.projection is not None:
        layer = 1 if entry.system == "pot2.l1" else 2
        comp = entry.components[0][0]
        plabels, pbad = [], None
        for label, f, b in cases:
            sys = systems.get(entry.system, f)
            got = project_pot2({comp: _bind(entry.components[0][1], b)}, layer, sys)
            want = _bind(entry.projection, b)
            plabels.append(label)
            if pbad is None and got != want:
                pbad = (label, got - want)
        group = entry.group.replace("symmetries", "projections")
        rows.append(ClaimResult(group, entry.id + ":projection", entry.system, pbad is None,
                                "0" if pbad is None else f"[{pbad[0]}] " + _summary([pbad[1]]),
                                "; ".join(plabels), f"expected P^p = {entry.projection}"))
    return rows


def _law_exprs(entry, flip: bool) -> ConsLaw:
    Phi = parse(entry.Phi)
    if flip:
        Phi = -Phi
    return ConsLaw.make([parse(q) for q in entry.Q], parse(entry.T), Phi, entry.id)


def check_law(entry, systems: _Systems, flip: bool = False) -> ClaimResult:
    sys = systems.get(entry.system, FSpec.generic())
    res = divergence_residual(_law_exprs(entry, flip), sys)
    notes = "; ".join(n for n in ("flux sign flipped" if flip else "", entry.note) if n)
    return ClaimResult(entry.group, entry.id, entry.system, res.is_zero(), _summary([res]), "generic f", notes)


def check_multipliers(entry, systems: _Systems) -> list:
    sys = systems.get(entry.system, FSpec.generic())
    rows = []
    expected = [tuple(parse(q) for q in Q) for Q in entry.basis]
    bad = None
    for Q in expected:
        res = multiplier_residual(list(Q), sys)
        if any(not r.is_zero() for r in res):
            bad = res
            break
    rows.append(ClaimResult(entry.group, entry.id + ":euler", entry.system, bad is None,
                            "0" if bad is None else _summary(bad), "generic f",
                            "each listed multiplier has zero Euler image" if expected
                            else "nothing listed"))
    found = find_multipliers(sys)
    same = (len(found.basis) == len(expected)
            and all(multiplier_in_span(found.basis, Q) for Q in expected)
            and all(multiplier_in_span(expected, Q) for Q in found.basis))
    shown = "{" + ", ".join("(" + ", ".join(to_string(q) for q in Q) + ")" for Q in found.basis) + "}"
    label = "empty multiplier basis" if not expected else f"basis dimension {len(expected)}"
    rows.append(ClaimResult(entry.group, entry.id + ":search", entry.system, same,
                            "0" if same else f"found {shown}",
                            f"generic f; ansatz dimension {found.dimension}",
                            f"{label}; search returned {shown}"))
    return rows


def check_bracket(entry) -> ClaimResult:
    b = entry.bindings

    def gen(name):
        g = catalog.GENERATORS[name]
        eta = {"p": _bind(g["p"], b)} if "p" in g else {}
        return Generator.make(_bind(g.get("tau", "0"), b), _bind(g.get("xi", "0"), b), **eta)

    got = lie_bracket(gen(entry.left), gen(entry.right))
    want = Generator.make(0, 0, p=0)
    for name, coeff in entry.expected:
        want = want + gen(name) * _bind(coeff, b)
    diff = got - want
    samples = ", ".join(f"{k}={v}" for k, v in b.items()) or "symbolic q, p0"
    ok = diff.is_zero()
    return ClaimResult("commutators", entry.id, "westervelt", ok, "0" if ok else str(diff), samples,
                       f"[{entry.left},{entry.right}] = {str(got)}")


def check_search(item, systems: _Systems, opts: VerifyOptions) -> ClaimResult:
    id_, system, family, degree, ids = item
    label, f, b = next(iter(_family_cases(family, opts)))
    sys = systems.get(system, f)
    basis = symmetry_search(sys, degree)
    expected = []
    for sid in ids:
        entry = catalog.symmetry(sid)
        expected.append({v: _bind(t, b) for v, t in entry.components})
    ok = (len(basis) == len(expected)
          and all(characteristic_in_span(basis, P, sys.depvars) for P in expected))
    shown = "; ".join(to_string(P["p"]) for P in basis)
    return ClaimResult("symmetry-search", id_, system, ok, "0" if ok else f"found {shown}",
                       f"{label}; polynomial degree {degree}", f"basis: {shown}")


def check_reconstruction(item, systems: _Systems) -> ClaimResult:
    id_, system, Q, law_id = item
    sys = systems.get(system, FSpec.generic())
    target = _law_exprs(catalog.law(law_id), False)
    rec = flux_reconstruct([parse(q) for q in Q], sys)
    cert = certify_equivalent(rec, target, sys)
    res = divergence_residual(rec, sys)
    ok = res.is_zero() and cert["equivalent"]
    return ClaimResult("flux-reconstruction", id_, system, ok, _summary([res]), "generic f",
                       f"T = {to_string(rec.T)}; equivalent to {law_id}: {cert['equivalent']}")


def check_control(item, systems: _Systems) -> ClaimResult:
    id_, system, kind, comps = item
    sys = systems.get(system, FSpec.generic())
    if kind == "symmetry":
        res = symmetry_residual(sys, {v: parse(t) for v, t in zip(sys.depvars, comps)})
    else:
        res = multiplier_residual([parse(t) for t in comps], sys)
    nonzero = any(not r.is_zero() for r in res)
    return ClaimResult("negative-controls", id_, system, nonzero, _summary(res), "generic f",
                       f"{kind} check must fail for {comps}", zero=not nonzero)


def shock_checks() -> list:
    """Numeric checks on the closed-form front."""
    rows = []
    p2 = tws.TWParams(c=2, nu=1, beta=1, kappa=1, n=2, U0=1)
    p3 = tws.TWParams(c=2, nu=1, beta=1, kappa=1, n=3, U0=1)
    amp = tws.amplitude(p2)
    rows.append(ClaimResult("shock-profile", "shock/amplitude-n2", "tws", amp == 3.0,
                            f"{amp - 3.0:.3e}", "c=2,nu=beta=kappa=U0=1", "amplitude equals 3 exactly"))
    lo, hi = tws.shock_closed_form(-60.0, p2), tws.shock_closed_form(60.0, p2)
    ok = abs(lo) <= 1e-8 and abs(hi - 3.0) <= 1e-8
    rows.append(ClaimResult("shock-profile", "shock/limits", "tws", ok,
                            f"{max(abs(lo), abs(hi - 3.0)):.3e}", "xi = -60, 60", "tolerance 1e-8"))
    amp3 = tws.amplitude(p3)
    rows.append(ClaimResult("shock-profile", "shock/amplitude-n3", "tws", abs(amp3 - math.sqrt(3)) <= 1e-12,
                            f"{amp3 - math.sqrt(3):.3e}", "n=3", "tolerance 1e-12"))
    U_to = 3.0 / (3.0 * math.exp(-3.0) + 1.0)
    dxi = tws.quadrature_xi(0.75, U_to, p2)
    rows.append(ClaimResult("shock-profile", "shock/quadrature-inversion", "tws", abs(dxi - 1.0) <= 1e-6,
                            f"{dxi - 1.0:.3e}", "U from 0.75 to U(1)", "tolerance 1e-6"))
    import numpy as np

    xis = np.linspace(-10.0, 10.0, 101)
    for p, tag in ((p2, "n2"), (p3, "n3")):
        r1 = tws.residual_check(p, xis)
        r3 = tws.third_order_residual(p, xis)
        rows.append(ClaimResult("shock-profile", f"shock/first-order-ode-{tag}", "tws", r1 <= 1e-9,
                                f"{r1:.3e}", "101 samples on [-10, 10]", "tolerance 1e-9"))
        rows.append(ClaimResult("shock-profile", f"shock/third-order-ode-{tag}", "tws", r3 <= 1e-9,
                                f"{r3:.3e}", "101 samples on [-10, 10]", "tolerance 1e-9"))
    return rows


# ----------------------------------------------------------------- driver


def run_claims(opts: VerifyOptions | None = None) -> Report:
    opts = opts or VerifyOptions()
    for s in opts.systems:
        if s not in SYSTEM_NAMES:
            raise ValueError(f"unknown system {s!r}")
    for g in opts.groups:
        if g not in catalog.GROUPS:
            raise ValueError(f"unknown claim group {g!r}")
    flip, perturb_all, perturb = _mutation_targets(opts)
    t0 = time.perf_counter()
    systems = _Systems()
    out = []
    for entry in catalog.SYMMETRIES:
        proj_group = entry.group.replace("symmetries", "projections")
        if not (_selected(entry.group, entry.system, opts)
                or (entry.projection is not None and _selected(proj_group, entry.system, opts))):
            continue
        rows = check_symmetry(entry, systems, opts, perturb_all or entry.id in perturb)
        out.extend(r for r in rows if _selected(r.group, r.system, opts))
    if _selected("commutators", "westervelt", opts):
        out.extend(check_bracket(e) for e in catalog.BRACKETS)
    for entry in catalog.MULTIPLIERS:
        if _selected(entry.group, entry.system, opts):
            out.extend(check_multipliers(entry, systems))
    for entry in catalog.LAWS:
        if _selected(entry.group, entry.system, opts):
            out.append(check_law(entry, systems, flip and entry.id == "westervelt/net-mass-rate"))
    for item in catalog.SEARCHES:
        if _selected("symmetry-search", item[1], opts):
            out.append(check_search(item, systems, opts))
    for item in catalog.RECONSTRUCTIONS:
        if _selected("flux-reconstruction", item[1], opts):
            out.append(check_reconstruction(item, systems))
    for item in catalog.NEGATIVE_CONTROLS:
        if _selected("negative-controls", item[1], opts):
            out.append(check_control(item, systems))
    if opts.include_numeric and not opts.systems and _selected("shock-profile", "tws", opts):
        out.extend(shock_checks())
    return Report(out, time.perf_counter() - t0)


# ----------------------------------------------------------------- output

CSV_COLUMNS = ["system", "law_id", "residual_zero", "notes", "group", "status", "residual", "samples"]


def format_text(report: Report, notes: bool = True) -> str:
    width = max([len(r.claim) for r in report.results] + [10])
    lines = [f"{'status':6}  {'system':10}  {'claim':{width}}  residual  |  samples"]
    for r in report.results:
        lines.append(f"{r.status:6}  {r.system:10}  {r.claim:{width}}  {r.residual}  |  {r.samples}")
        if notes and r.notes:
            lines.append(f"{'':6}  {'':10}  {'':{width}}  note: {r.notes}")
    lines.append("")
    lines.append(f"{report.passed} PASS, {report.failed} FAIL in {report.elapsed:.2f} s")
    return "\n".join(lines)


def format_report(report: Report) -> str:
    """Consolidated report: one section per claim group, in catalogue order."""
    lines = ["Verification report", "=" * 19, ""]
    order = {g: i for i, g in enumerate(catalog.GROUPS)}
    groups = sorted({r.group for r in report.results}, key=lambda g: order.get(g, len(order)))
    for g in groups:
        rows = [r for r in report.results if r.group == g]
        bad = sum(not r.passed for r in rows)
        lines.append(f"[{'PASS' if not bad else 'FAIL'}] {g}: {len(rows) - bad}/{len(rows)} rows pass")
        for r in rows:
            lines.append(f"    {r.status}  {r.claim}  residual={r.residual}  samples={r.samples}")
            if r.notes:
                lines.append(f"          {r.notes}")
        lines.append("")
    lines.append(f"total: {report.passed} PASS, {report.failed} FAIL")
    return "\n".join(lines)


def write_csv(report: Report, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in report.results:
            w.writerow([r.system, r.claim, "yes" if r.residual_zero else "no", r.notes, r.group, r.status,
                        r.residual, r.samples])
    return path


def write_text(report: Report, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_text(report) + "\n")
    return path
