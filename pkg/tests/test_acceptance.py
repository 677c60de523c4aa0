"""Acceptance checks, one test per criterion.

Each test records a one-line verdict; ``conftest.py`` prints the verdicts
at the end of the run (also when run as ``python tests/test_acceptance.py``).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from westervelt import catalog, fdsim, tws
from westervelt.conslaw import find_multipliers
from westervelt.kernel import substitute
from westervelt.parser import parse
from westervelt.symmetry import Generator, lie_bracket
from westervelt.systems import build_system, build_westervelt
from westervelt.verify import VerifyOptions, run_claims

VERDICTS: dict = {}


def record(number: int, ok: bool, detail: str):
    VERDICTS[number] = (bool(ok), detail)
    assert ok, f"criterion {number}: {detail}"


def _groups(*groups, **kw):
    return run_claims(VerifyOptions(groups=groups, include_numeric=False, **kw))


@pytest.fixture(scope="module")
def shock_study():
    t0 = time.perf_counter()
    order, errors, drifts = fdsim.convergence_order(fdsim.GridConfig(t_end=1.0), (100, 200, 400))
    return order, errors, drifts, time.perf_counter() - t0


def test_criterion_01_symmetry_classification():
    t0 = time.perf_counter()
    rep = _groups("point-symmetries")
    elapsed = time.perf_counter() - t0
    rows = {r.claim: r for r in rep.results}
    families = [rows["westervelt/scaling"], rows["westervelt/nonrigid-scaling"]]
    enough = all(r.samples.count("=") >= 3 * 2 for r in families)
    ok = rep.ok and len(rows) == 4 and enough and elapsed < 10.0
    record(1, ok, f"{rep.passed}/{len(rep.results)} characteristics zero, "
                  f"families at >= 3 exact samples, {elapsed:.2f} s (limit 10 s)")


def _gen(name, bindings=None):
    g = catalog.GENERATORS[name]
    sub = lambda text: substitute(parse(text), bindings or {})
    eta = {"p": sub(g["p"])} if "p" in g else {}
    return Generator.make(sub(g.get("tau", "0")), sub(g.get("xi", "0")), **eta)


def test_criterion_02_commutator_table():
    X1, X2, X3, X4 = (_gen(n) for n in ("X1", "X2", "X3", "X4"))
    X3m4 = _gen("X3", {"q": -4})
    checks = [
        lie_bracket(X2, X3) == X2 * parse("q"),
        lie_bracket(X2, X4) == X3m4 * Fraction(-1, 2),
        lie_bracket(X3m4, X4) == X4 * -4,
        lie_bracket(X1, X2).is_zero(),
        lie_bracket(X1, X3).is_zero(),
        lie_bracket(X1, X4).is_zero(),
    ]
    rep = _groups("commutators")
    ok = all(checks) and rep.ok and len(rep.results) == 6
    record(2, ok, f"{sum(checks)}/6 brackets equal exactly; catalogue rows {rep.passed}/{len(rep.results)}")


def test_criterion_03_multiplier_classification():
    found = find_multipliers(build_westervelt())
    expected = [(parse(q),) for q in ("1", "t", "x", "t*x")]
    contained = all(found.contains(Q) for Q in expected)
    ok = len(found.basis) == 4 and contained
    record(3, ok, f"basis dimension {len(found.basis)} from an ansatz of dimension {found.dimension}; "
                  f"span{{1, t, x, tx}} contained: {contained}")


def test_criterion_04_conservation_laws():
    rep = _groups("conservation-laws")
    ok = rep.ok and len(rep.results) == 4
    record(4, ok, f"{rep.passed}/4 divergence residuals zero with generic f")


POTENTIAL_COUNTS = {
    "pot1-l1-symmetries": 4, "pot1-l2-symmetries": 6, "pot2-l1-symmetries": 6, "pot2-l2-symmetries": 8,
    "pot2-l1-projections": 6, "pot2-l2-projections": 8,
    "pot1-l1-laws": 3, "pot1-l2-law": 1, "pot2-l1-laws": 2,
}


def test_criterion_05_potential_systems():
    groups = tuple(POTENTIAL_COUNTS) + ("pot2-l2-multipliers",)
    rep = _groups(*groups)
    counts = {g: sum(r.group == g for r in rep.results) for g in POTENTIAL_COUNTS}
    empty = len(find_multipliers(build_system("pot2.l2")).basis) == 0
    ok = rep.ok and counts == POTENTIAL_COUNTS and empty
    record(5, ok, f"{rep.passed}/{len(rep.results)} rows zero; counts {counts == POTENTIAL_COUNTS}; "
                  f"pot2.l2 multiplier basis empty: {empty}")


def test_criterion_06_shock_closed_form():
    p2 = tws.TWParams(c=2, nu=1, beta=1, kappa=1, n=2, U0=1)
    p3 = tws.TWParams(c=2, nu=1, beta=1, kappa=1, n=3, U0=1)
    amp = tws.amplitude(p2)
    lo, hi = tws.shock_closed_form(-60.0, p2), tws.shock_closed_form(60.0, p2)
    amp3 = tws.amplitude(p3)
    ok = amp == 3.0 and abs(lo) <= 1e-8 and abs(hi - amp) <= 1e-8 and abs(amp3 - math.sqrt(3)) <= 1e-12
    record(6, ok, f"amplitude {amp!r}, U(-60) = {lo:.1e}, |U(60) - 3| = {abs(hi - 3):.1e}, "
                  f"n=3 amplitude error {abs(amp3 - math.sqrt(3)):.1e}")


def test_criterion_07_quadrature_inversion():
    p2 = tws.TWParams(c=2, nu=1, beta=1, kappa=1, n=2, U0=1)
    U1 = 3.0 / (3.0 * math.exp(-3.0) + 1.0)
    dxi = tws.quadrature_xi(0.75, U1, p2)
    ok = abs(tws.shock_closed_form(0.0, p2) - 0.75) < 1e-15 and abs(dxi - 1.0) <= 1e-6
    record(7, ok, f"xi difference {dxi:.10f} (tolerance 1e-6)")


def test_criterion_08_ode_residuals():
    xis = np.linspace(-10.0, 10.0, 101)
    worst = 0.0
    for n in (2, 3):
        p = tws.TWParams(c=2, nu=1, beta=1, kappa=1, n=n, U0=1)
        worst = max(worst, tws.residual_check(p, xis), tws.third_order_residual(p, xis))
    record(8, worst <= 1e-9, f"max residual {worst:.2e} over 101 samples, n in {{2, 3}} (limit 1e-9)")


def test_criterion_09_simulator_convergence(shock_study):
    order, errors, _, elapsed = shock_study
    ok = 1.8 <= order <= 2.2 and elapsed < 60.0
    record(9, ok, f"Linf order {order:.4f} from errors {', '.join(f'{e:.2e}' for e in errors)}; "
                  f"{elapsed:.1f} s (limit 60 s)")


def test_criterion_10_conserved_quantity_monitoring(shock_study):
    cfg = fdsim.GridConfig(x_min=-5.0, x_max=5.0, N=400, bc="periodic", t_end=1.0, monitor_stride=200,
                           initial={"type": "pulse", "amplitude": 0.2, "width": 0.5, "center": 0.0})
    _, rep = fdsim.run(cfg)
    rel = rep.relative_drift(0)
    drift_orders = fdsim.observed_orders(shock_study[2], (100, 200, 400))
    ok = rel <= 1e-6 and all(o >= 2.0 for o in drift_orders)
    record(10, ok, f"periodic relative C1 drift {rel:.1e} (limit 1e-6); flux-corrected drift orders "
                   + ", ".join(f"{o:.3f}" for o in drift_orders) + " (need >= 2)")


def test_criterion_11_mutation_sensitivity():
    flip = run_claims(VerifyOptions(mutations=("flip-phi1",), include_numeric=False))
    flip_bad = [r for r in flip.results if not r.passed]
    flip_ok = (len(flip_bad) == 1 and flip_bad[0].claim == "westervelt/net-mass-rate"
               and flip_bad[0].residual != "0")
    pert = run_claims(VerifyOptions(mutations=("perturb-all",), include_numeric=False, samples=1,
                                    symbolic=False))
    caught = {e.id for e in catalog.SYMMETRIES
              if any(r.claim.startswith(e.id) and not r.passed and r.residual != "0" for r in pert.results)}
    pert_ok = caught == {e.id for e in catalog.SYMMETRIES}
    record(11, flip_ok and pert_ok, f"flipped flux rows failing: {len(flip_bad)}; perturbed characteristics "
                                    f"caught {len(caught)}/{len(catalog.SYMMETRIES)}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
