from dataclasses import replace

import numpy as np
import pytest

from westervelt import fdsim
from westervelt.families import FSpec
from westervelt.fdsim import (
    ConfigError,
    GridConfig,
    GridState,
    HyperbolicityError,
    convergence_order,
    initial_state,
    rhs_eval,
    run,
    step_rk4,
)
from westervelt.tws import shock_derivatives


def _periodic(**kw):
    base = dict(x_min=-5.0, x_max=5.0, N=100, bc="periodic", t_end=0.2,
                initial={"type": "pulse", "amplitude": 0.2, "width": 0.5, "center": 0.0})
    base.update(kw)
    return GridConfig(**base)


# --- configuration -----------------------------------------------------------


def test_auto_time_step():
    cfg = GridConfig(N=100)
    assert cfg.time_step() == min(0.25 * cfg.dx ** 2 / 1.0, 0.5 * cfg.dx / 2.0)
    stiff = GridConfig(N=100, beta=0.1)
    assert stiff.time_step() == min(0.25 * stiff.dx ** 2, 0.5 * stiff.dx / 2.0)


@pytest.mark.parametrize("bad", [dict(N=8), dict(bc="neumann"), dict(x_max=-3.0), dict(dt=0),
                                 dict(f=FSpec.generic()), dict(monitor_stride=0)])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        GridConfig(**bad)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        GridConfig.from_dict({"N": 100, "grid": 3})
    cfg = GridConfig.from_dict({"N": 64, "f": {"variant": "westervelt_poly", "kappa": 1, "n": 3}})
    assert cfg.shock.n == 3.0


# --- right-hand side -----------------------------------------------------------


def test_equilibrium_is_a_fixed_point():
    cfg = _periodic(initial={"type": "constant", "value": 0.3})
    s = initial_state(cfg)
    dp, dq = rhs_eval(s, cfg)
    assert not dp.any() and not dq.any()
    s2 = step_rk4(s, cfg)
    assert np.array_equal(s2.p, s.p) and np.array_equal(s2.q, s.q)


def test_hyperbolicity_guard_names_the_node():
    cfg = _periodic(initial={"type": "constant", "value": 0.0})
    p = np.zeros(cfg.N + 1)
    p[17] = -0.6  # f'(p) = 1 + 2p < 0
    with pytest.raises(HyperbolicityError) as info:
        rhs_eval(GridState(0.0, p, np.zeros_like(p)), cfg)
    assert info.value.node == 17


def test_rhs_matches_exact_time_derivative():
    errs = []
    for N in (100, 200):
        cfg = GridConfig(N=N)
        s = initial_state(cfg)
        dp, dq = rhs_eval(s, cfg)
        nu = cfg.shock.nu
        _, U1, U2 = shock_derivatives(cfg.x, cfg.shock, 2)
        assert np.allclose(dp, -nu * U1, atol=1e-14)
        errs.append(np.max(np.abs(dq - nu ** 2 * U2)))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_linear_plane_wave():
    # f(p) = p and beta = 0: d'Alembert travelling wave
    L = 2 * np.pi
    cfg = GridConfig(x_min=0.0, x_max=L, N=400, bc="periodic", beta=0.0, c=1.0, f=FSpec.linear(),
                     initial={"type": "constant"}, t_end=0.5)
    x = cfg.x
    s = GridState(0.0, np.sin(x), -np.cos(x))
    dt = cfg.time_step()
    steps = int(round(cfg.t_end / dt))
    for _ in range(steps):
        s = step_rk4(s, cfg, dt)
    err = np.max(np.abs(s.p - np.sin(x - s.t)))
    assert err < 1e-5


# --- time stepping -------------------------------------------------------------


def test_time_refinement_is_fourth_order():
    cfg = GridConfig(N=40, t_end=0.05)
    base = cfg.time_step()
    finals = []
    for k in range(3):
        dt = base / 2 ** k
        s = initial_state(cfg)
        for _ in range(2 ** k * 20):
            s = step_rk4(s, cfg, dt)
        finals.append(s.p)
    ratio = np.max(np.abs(finals[0] - finals[1])) / np.max(np.abs(finals[1] - finals[2]))
    assert 12 < ratio < 20


def test_blow_up_is_detected():
    cfg = GridConfig(N=40, dt=10.0)
    with pytest.raises((fdsim.BlowUpError, HyperbolicityError)):
        s = initial_state(cfg)
        for _ in range(20):
            s = step_rk4(s, cfg)


# --- runs and monitors -----------------------------------------------------------


def test_zero_duration_run_records_initial_values():
    cfg = GridConfig(N=64, t_end=0.0)
    final, rep = run(cfg)
    assert rep.times == [0.0]
    p = initial_state(cfg).p
    assert rep.C[0][1] == pytest.approx(-np.trapezoid(p + p ** 2, cfg.x), rel=1e-14)
    assert not rep.final_drift.any()


def test_periodic_pulse_conserves_c1():
    final, rep = run(_periodic())
    assert rep.relative_drift(0) < 1e-6
    assert np.isnan(rep.err_linf[-1])


def test_runs_are_deterministic():
    cfg = GridConfig(N=50, t_end=0.05)
    a, ra = run(cfg)
    b, rb = run(cfg)
    assert np.array_equal(a.p, b.p) and np.array_equal(a.q, b.q)
    assert all(np.array_equal(x, y) for x, y in zip(ra.C, rb.C))


def test_shock_run_error_shrinks_by_four():
    cfg = GridConfig(t_end=0.2)
    errs = [run(replace(cfg, N=N, monitor_stride=10 ** 9))[1].err_linf[-1] for N in (100, 200)]
    assert 3.6 < errs[0] / errs[1] < 4.4


def test_non_monotone_errors_are_flagged():
    with pytest.raises(ArithmeticError):
        convergence_order(GridConfig(t_end=0.02), grids=(80, 40, 20))


def test_convergence_needs_exact_solution():
    with pytest.raises(ConfigError):
        convergence_order(_periodic(t_end=0.01), grids=(20, 40))


def test_outputs(tmp_path):
    cfg = GridConfig(N=32, t_end=0.01, monitor_stride=5)
    snaps = []
    _, rep = run(cfg, snaps)
    out = fdsim.write_outputs(tmp_path, cfg, rep, snaps)
    head = (out / "monitors.csv").read_text().splitlines()[0]
    assert head == "t,C1,C2,C3,C4,drift1,drift2,drift3,drift4,errLinf,errL2"
    states = sorted(out.glob("state_*.csv"))
    assert len(states) == len(rep.times)
    assert states[0].read_text().splitlines()[0] == "x,p,q"


def test_observed_orders():
    vals = np.array([[1.0, 8.0], [0.25, 1.0], [0.0625, 0.125]])
    assert np.allclose(fdsim.observed_orders(vals, [100, 200, 400]), [2.0, 3.0])


# --- refinement studies ----------------------------------------------------------


def test_cubic_nonlinearity_converges_at_second_order():
    cfg = GridConfig(f=FSpec.westervelt_poly(1, 3))
    order, errors, _ = convergence_order(cfg, (100, 200, 400))
    assert 1.8 <= order <= 2.2


def test_small_damping_stays_stable_and_second_order():
    # beta = 0.1 steepens the front; the window follows it over a short run
    cfg = GridConfig(x_min=-0.5, x_max=0.6, t_end=0.1, beta=0.1)
    order, errors, _ = convergence_order(cfg, (100, 200, 400))
    assert all(np.isfinite(errors))
    assert 1.8 <= order <= 2.2
