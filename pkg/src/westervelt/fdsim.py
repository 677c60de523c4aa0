"""Method-of-lines solver for ``f(p)_tt - beta p_xxt = c^2 p_xx``.

The state is ``(p, q = p_t)`` on a uniform grid with N cells (N+1 nodes).
Expanding ``f(p)_tt`` gives

    q_t = (c^2 p_xx + beta q_xx - f''(p) q^2) / f'(p),

discretised with second-order central differences and advanced with
classical RK4.  Boundary fluxes of the four conservation laws are
integrated alongside the state with the same RK4 stages, so the
flux-corrected drift is measured at scheme order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .conslaw import ConservedQuantities
from .families import FSpec
from .tws import TWParams, shock_closed_form, shock_derivatives

EPS_HYPERBOLIC = 1e-10
BCS = ("dirichlet-exact", "periodic")


class HyperbolicityError(FloatingPointError):
    def __init__(self, node: int, value: float):
        super().__init__(f"f'(p) = {value:.3e} below {EPS_HYPERBOLIC} at node {node}")
        self.node = node


class BlowUpError(FloatingPointError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    x_min: float = -2.0
    x_max: float = 3.0
    N: int = 200
    dt: object = "auto"
    t_end: float = 1.0
    bc: str = "dirichlet-exact"
    f: FSpec = field(default_factory=lambda: FSpec.westervelt_poly(1, 2))
    monitor_stride: int = 10
    beta: float = 1.0
    c: float = 2.0
    initial: dict = field(default_factory=lambda: {"type": "shock"})
    shock: TWParams | None = None

    def __post_init__(self):
        if self.N < 16:
            raise ConfigError("N must be at least 16")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min")
        if self.bc not in BCS:
            raise ConfigError(f"bc must be one of {BCS}")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be non-negative")
        if self.dt != "auto" and not float(self.dt) > 0:
            raise ConfigError("dt must be positive or 'auto'")
        if self.f.is_generic:
            raise ConfigError("the simulator needs a concrete f")
        if self.monitor_stride < 1:
            raise ConfigError("monitor_stride must be >= 1")
        if self.initial.get("type") == "shock" and self.shock is None:
            self.shock = self.shock_from_f()

    def shock_from_f(self) -> TWParams:
        if self.f.variant != "westervelt_poly":
            raise ConfigError("shock data needs f = p + kappa p^n")
        opts = {k: v for k, v in self.initial.items() if k in ("nu", "U0", "xi0")}
        return TWParams(c=self.c, beta=self.beta, kappa=float(self.f.kappa), n=float(self.f.n), **opts)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.N

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.N + 1)

    def time_step(self) -> float:
        if self.dt == "auto":
            return min(0.25 * self.dx ** 2 / max(self.beta, 1.0), 0.5 * self.dx / self.c)
        return float(self.dt)

    @classmethod
    def from_dict(cls, cfg: dict) -> "GridConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = dict(cfg)
        if "f" in cfg and isinstance(cfg["f"], dict):
            cfg["f"] = FSpec.from_dict(cfg["f"])
        if "shock" in cfg and isinstance(cfg["shock"], dict):
            cfg["shock"] = TWParams(**cfg["shock"])
        return cls(**cfg)

    @classmethod
    def from_json(cls, path) -> "GridConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class GridState:
    t: float
    p: np.ndarray
    q: np.ndarray


def exact_solution(cfg: GridConfig, t: float):
    """``(p, q)`` from the travelling front, or ``None`` without one."""
    if cfg.shock is None:
        return None
    xi = cfg.x - cfg.shock.nu * t
    U, U1 = shock_derivatives(xi, cfg.shock, 1)
    return U, -cfg.shock.nu * U1


def initial_state(cfg: GridConfig) -> GridState:
    kind = cfg.initial.get("type", "shock")
    x = cfg.x
    if kind == "shock":
        p, q = exact_solution(cfg, 0.0)
    elif kind == "pulse":
        amp = cfg.initial.get("amplitude", 0.1)
        width = cfg.initial.get("width", 0.5)
        center = cfg.initial.get("center", 0.5 * (cfg.x_min + cfg.x_max))
        q_amp = cfg.initial.get("q_amplitude", amp)
        g = np.exp(-((x - center) / width) ** 2)
        p, q = amp * g, q_amp * g
    elif kind == "constant":
        p = np.full_like(x, cfg.initial.get("value", 0.0))
        q = np.zeros_like(x)
    else:
        raise ConfigError(f"unknown initial condition {kind!r}")
    if cfg.bc == "periodic":
        p, q = p.copy(), q.copy()
        p[-1], q[-1] = p[0], q[0]
    return GridState(0.0, np.array(p, dtype=float), np.array(q, dtype=float))


def _laplacian(y, dx, periodic):
    out = np.zeros_like(y)
    if periodic:
        core = y[:-1]
        lap = (np.roll(core, -1) - 2.0 * core + np.roll(core, 1)) / dx ** 2
        out[:-1] = lap
        out[-1] = lap[0]
    else:
        out[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / dx ** 2
    return out


def rhs_eval(state: GridState, cfg: GridConfig):
    """``(dp/dt, dq/dt)`` for the semi-discrete system."""
    p, q = state.p, state.q
    f1 = cfg.f.numeric(1, p)
    bad = np.flatnonzero(~(f1 >= EPS_HYPERBOLIC))
    if bad.size:
        raise HyperbolicityError(int(bad[0]), float(f1[bad[0]]))
    f2 = cfg.f.numeric(2, p)
    periodic = cfg.bc == "periodic"
    dq = (cfg.c ** 2 * _laplacian(p, cfg.dx, periodic) + cfg.beta * _laplacian(q, cfg.dx, periodic)
          - f2 * q ** 2) / f1
    dp = q.copy()
    if not periodic:
        # boundary nodes follow the exact front: p_t = -nu U', q_t = nu^2 U''
        nu = cfg.shock.nu
        ends = np.array([cfg.x_min, cfg.x_max]) - nu * state.t
        _, U1, U2 = shock_derivatives(ends, cfg.shock, 2)
        dp[[0, -1]] = -nu * U1
        dq[[0, -1]] = nu ** 2 * U2
    return dp, dq


def _monitors(cfg: GridConfig) -> ConservedQuantities:
    return ConservedQuantities(cfg.f, cfg.beta, cfg.c)


def _flux_rate(cq, cfg, state):
    return cq.boundary_flux(cfg.x, state.t, state.p, state.q, cfg.bc == "periodic")


def step_rk4(state: GridState, cfg: GridConfig, dt: float | None = None, flux: np.ndarray | None = None,
             cq: ConservedQuantities | None = None):
    """One classical RK4 step; also advances the boundary-flux integrals if given."""
    dt = cfg.time_step() if dt is None else dt
    track = flux is not None
    cq = cq or _monitors(cfg)

    def stage(t, p, q):
        s = GridState(t, p, q)
        dp, dq = rhs_eval(s, cfg)
        return dp, dq, (_flux_rate(cq, cfg, s) if track else None)

    t, p, q = state.t, state.p, state.q
    k1 = stage(t, p, q)
    k2 = stage(t + dt / 2, p + dt / 2 * k1[0], q + dt / 2 * k1[1])
    k3 = stage(t + dt / 2, p + dt / 2 * k2[0], q + dt / 2 * k2[1])
    k4 = stage(t + dt, p + dt * k3[0], q + dt * k3[1])
    p_new = p + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    q_new = q + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    if not (np.all(np.isfinite(p_new)) and np.all(np.isfinite(q_new))):
        raise BlowUpError(f"non-finite state at t = {t + dt}")
    new = GridState(t + dt, p_new, q_new)
    if track:
        flux = flux + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        return new, flux
    return new


@dataclass
class MonitorReport:
    times: list = field(default_factory=list)
    C: list = field(default_factory=list)
    drift: list = field(default_factory=list)
    err_linf: list = field(default_factory=list)
    err_l2: list = field(default_factory=list)

    def record(self, t, C, drift, linf, l2):
        self.times.append(float(t))
        self.C.append(np.asarray(C, dtype=float))
        self.drift.append(np.asarray(drift, dtype=float))
        self.err_linf.append(float(linf))
        self.err_l2.append(float(l2))

    @property
    def final_drift(self) -> np.ndarray:
        return self.drift[-1]

    def relative_drift(self, i: int) -> float:
        c0 = abs(self.C[0][i])
        return float(self.drift[-1][i] / c0) if c0 else float(self.drift[-1][i])

    def rows(self):
        for t, C, d, a, b in zip(self.times, self.C, self.drift, self.err_linf, self.err_l2):
            yield [t, *C.tolist(), *d.tolist(), a, b]


def _errors(cfg, state):
    ex = exact_solution(cfg, state.t)
    if ex is None:
        return math.nan, math.nan
    diff = state.p - ex[0]
    return float(np.max(np.abs(diff))), float(np.sqrt(np.trapezoid(diff ** 2, cfg.x)))


def run(cfg: GridConfig, snapshots=None):
    """Integrate to ``t_end``; returns ``(final_state, MonitorReport)``.

    ``snapshots`` is an optional list collecting ``GridState`` copies at
    each monitor time.
    """
    cq = _monitors(cfg)
    state = initial_state(cfg)
    dt = cfg.time_step()
    steps = int(math.ceil(cfg.t_end / dt - 1e-12)) if cfg.t_end > 0 else 0
    dt = cfg.t_end / steps if steps else dt
    report = MonitorReport()
    C0 = cq.integrals(cfg.x, 0.0, state.p, state.q)
    flux = np.zeros(4)

    def monitor():
        C = cq.integrals(cfg.x, state.t, state.p, state.q)
        report.record(state.t, C, np.abs(C - C0 + flux), *_errors(cfg, state))
        if snapshots is not None:
            snapshots.append(GridState(state.t, state.p.copy(), state.q.copy()))

    monitor()
    for k in range(1, steps + 1):
        state, flux = step_rk4(state, cfg, dt, flux, cq)
        if k == steps:
            state.t = cfg.t_end
        if k % cfg.monitor_stride == 0 or k == steps:
            monitor()
    return state, report


def convergence_order(cfg: GridConfig, grids=(100, 200, 400)):
    """Least-squares slope of log(Linf error) against log(dx).

    Returns ``(order, errors, drifts)``.  Raises if the errors do not
    decrease monotonically under refinement.
    """
    errors, dxs, drifts = [], [], []
    for N in grids:
        c = replace(cfg, N=N, monitor_stride=10 ** 9)
        _, rep = run(c)
        errors.append(rep.err_linf[-1])
        drifts.append(rep.final_drift)
        dxs.append(c.dx)
    if any(not math.isfinite(e) for e in errors):
        raise ConfigError("convergence study needs an exact solution")
    if any(b >= a for a, b in zip(errors, errors[1:])):
        raise ArithmeticError(f"non-monotone error sequence {errors}")
    slope = float(np.polyfit(np.log(dxs), np.log(errors), 1)[0])
    return slope, errors, np.array(drifts)


def observed_orders(values, grids) -> np.ndarray:
    """Least-squares log-log slopes, one per column of ``values``."""
    values = np.asarray(values, dtype=float)
    logs = np.log(1.0 / np.asarray(grids, dtype=float))
    return np.array([np.polyfit(logs, np.log(values[:, j]), 1)[0] for j in range(values.shape[1])])


def write_outputs(out_dir, cfg: GridConfig, report: MonitorReport, snapshots):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in snapshots:
        with (out / f"state_{s.t:.6f}.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "p", "q"])
            for row in zip(cfg.x, s.p, s.q):
                w.writerow([repr(float(v)) for v in row])
    with (out / "monitors.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "C1", "C2", "C3", "C4", "drift1", "drift2", "drift3", "drift4", "errLinf", "errL2"])
        for row in report.rows():
            w.writerow([repr(float(v)) for v in row])
    return out
