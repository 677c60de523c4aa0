"""Command-line front end: ``python -m westervelt <command> ...``.

Exit codes: 0 when everything ran and passed, 1 when any check failed,
2 for usage errors (bad flags, bad parameters, nothing selected).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import catalog, fdsim, tws, verify
from .conslaw import Ansatz, AnsatzGuardError, find_multipliers
from .families import FamilyConstraintError, FSpec
from .kernel import ExprError, to_string
from .symmetry import AnsatzTooLarge, symmetry_search
from .systems import SYSTEM_NAMES, build_system

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a command needs, gathered from flags (and a JSON file where allowed)."""

    command: str
    out_dir: Path = Path("out")
    seed: int = 0
    samples: int = 3
    system: str | None = None

    def prepare_out_dir(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _add_common(p, suppress: bool, samples: bool = True):
    # subcommands repeat the global flags; SUPPRESS keeps them from resetting values given earlier
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--out-dir", default=dflt("out"), help="directory for all written files")
    p.add_argument("--seed", type=int, default=dflt(0), help="seed for extra random parameter samples")
    if samples:
        p.add_argument("--samples", type=int, default=dflt(3),
                       help="number of exact parameter samples per family")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="westervelt", description="Verification toolkit for f(p)_tt - beta p_xxt = c^2 p_xx.")
    _add_common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    common = _Parser(add_help=False)
    _add_common(common, suppress=True)
    common_shock = _Parser(add_help=False)
    _add_common(common_shock, suppress=True, samples=False)

    v = sub.add_parser("verify", parents=[common], help="check symmetries, laws and multipliers")
    v.add_argument("--system", action="append", choices=SYSTEM_NAMES, help="restrict to a system (repeatable)")
    v.add_argument("--theorem", action="append", choices=catalog.GROUPS, help="restrict to a claim group")
    v.add_argument("--laws", action="store_true", help="only conservation laws and multipliers")
    v.add_argument("--all", action="store_true", help="run every claim")
    v.add_argument("--mutate", action="append", default=[],
                   help="inject an error: flip-phi1, perturb-all or perturb:<characteristic id>")
    v.add_argument("--no-symbolic", action="store_true", help="skip the runs with symbolic k and shift")

    d = sub.add_parser("derive", parents=[common], help="search for multipliers or point symmetries")
    d.add_argument("--system", required=True, choices=SYSTEM_NAMES)
    d.add_argument("--order", type=int, default=2, help="jet order of multiplier entries")
    d.add_argument("--coeff-degree", type=int, default=1, help="degree in each of t and x of coefficients")
    d.add_argument("--degree", type=int, default=1, help="degree in jet coordinates (multipliers) "
                                                          "or polynomial degree (symmetries)")
    d.add_argument("--symmetries", action="store_true", help="search point symmetries instead")
    d.add_argument("--family", choices=("generic", "power_law", "inverse_cube"), default="generic")
    d.add_argument("--q", default="2")
    d.add_argument("--p0", default="0")
    d.add_argument("--k", default="1")
    d.add_argument("--max-unknowns", type=int, default=600)

    s = sub.add_parser("shock", parents=[common_shock], help="write the closed-form front as CSV")
    s.add_argument("--n", type=float, default=2.0)
    s.add_argument("--c", type=float, default=2.0)
    s.add_argument("--nu", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--kappa", type=float, default=1.0)
    s.add_argument("--u0", type=float, default=1.0)
    s.add_argument("--xi0", type=float, default=0.0)
    s.add_argument("--xi-min", type=float, default=-10.0)
    s.add_argument("--xi-max", type=float, default=10.0)
    s.add_argument("--samples", dest="points", type=int, default=401, help="number of xi samples")
    s.add_argument("--spacetime", action="store_true", help="write t,x,U rows instead of xi,U")
    s.add_argument("--t-max", type=float, default=5.0)
    s.add_argument("--t-samples", type=int, default=6)
    s.add_argument("--out", default="profile.csv", help="file name inside --out-dir (or absolute path)")

    m = sub.add_parser("simulate", parents=[common], help="run the finite-difference solver")
    m.add_argument("--config", required=True, help="JSON file with GridConfig fields")

    c = sub.add_parser("convergence", parents=[common], help="grid refinement study on the exact front")
    c.add_argument("--config", help="JSON file with GridConfig fields (N is overridden)")
    c.add_argument("--grids", type=int, nargs="+", default=[100, 200, 400])
    c.add_argument("--min-order", type=float, default=1.8)
    c.add_argument("--max-order", type=float, default=2.2)

    r = sub.add_parser("report", parents=[common], help="full verification report as text and CSV")
    r.add_argument("--input", help="re-render an existing verification CSV instead of re-running")
    return ap


def _usage_from_samples(value: int):
    if value < 1:
        raise UsageError("--samples must be at least 1")


def _out_path(cfg: RunConfig, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else cfg.prepare_out_dir() / p


# ----------------------------------------------------------------- commands


def cmd_verify(args, cfg: RunConfig) -> int:
    if not (args.all or args.system or args.theorem or args.laws):
        raise UsageError("verify needs --all, --system, --theorem or --laws")
    opts = verify.VerifyOptions(systems=tuple(args.system or ()), groups=tuple(args.theorem or ()),
                                laws_only=args.laws, samples=cfg.samples, seed=cfg.seed,
                                symbolic=not args.no_symbolic, mutations=tuple(args.mutate))
    try:
        report = verify.run_claims(opts)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not report.results:
        raise UsageError("no claims matched the selection")
    print(verify.format_text(report))
    verify.write_csv(report, _out_path(cfg, "verify.csv"))
    verify.write_text(report, _out_path(cfg, "verify.txt"))
    return EXIT_OK if report.ok else EXIT_FAIL


def _family(args) -> FSpec:
    if args.family == "power_law":
        return FSpec.power_law(args.k, args.p0, args.q)
    if args.family == "inverse_cube":
        return FSpec.inverse_cube(args.k, args.p0)
    return FSpec.generic()


def cmd_derive(args, cfg: RunConfig) -> int:
    sys_ = build_system(args.system, f=_family(args))
    lines = []
    if args.symmetries:
        basis = symmetry_search(sys_, args.degree, args.max_unknowns)
        lines.append(f"point-symmetry characteristics of {args.system} ({args.family}), "
                     f"polynomial degree {args.degree}: dimension {len(basis)}")
        for i, P in enumerate(basis, 1):
            lines.append(f"  P{i}: " + ", ".join(f"P^{v} = {to_string(e)}" for v, e in P.items()))
    else:
        ansatz = Ansatz(order=args.order, degree=args.degree, coeff_degree=args.coeff_degree,
                        max_unknowns=args.max_unknowns)
        found = find_multipliers(sys_, ansatz)
        lines.append(f"low-order multipliers of {args.system}: ansatz dimension {found.dimension}, "
                     f"basis dimension {len(found.basis)}")
        if not found.basis:
            lines.append("  empty multiplier basis")
        for i, Q in enumerate(found.basis, 1):
            lines.append(f"  Q{i} = (" + ", ".join(to_string(q) for q in Q) + ")")
    text = "\n".join(lines)
    print(text)
    _out_path(cfg, f"derive_{args.system}.txt").write_text(text + "\n")
    return EXIT_OK


def cmd_shock(args, cfg: RunConfig) -> int:
    p = tws.TWParams(c=args.c, nu=args.nu, beta=args.beta, kappa=args.kappa, n=args.n, U0=args.u0,
                     xi0=args.xi0)
    if args.points < 2 or not args.xi_max > args.xi_min:
        raise UsageError("need at least 2 samples and xi-max > xi-min")
    amp = tws.amplitude(p)
    xis = np.linspace(args.xi_min, args.xi_max, args.points)
    if args.spacetime:
        times = np.linspace(0.0, args.t_max, args.t_samples)
        rows = tws.profile_table(p, xis, times)
    else:
        rows = tws.profile_table(p, xis)
    path = tws.write_profile(_out_path(cfg, args.out), rows, spacetime=args.spacetime)
    print(f"amplitude {amp!r}; wrote {len(rows)} rows to {path}")
    return EXIT_OK


def _grid_config(path) -> fdsim.GridConfig:
    try:
        return fdsim.GridConfig.from_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc


def cmd_simulate(args, cfg: RunConfig) -> int:
    grid = _grid_config(args.config)
    snaps: list = []
    try:
        state, report = fdsim.run(grid, snaps)
    except (fdsim.HyperbolicityError, fdsim.BlowUpError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = fdsim.write_outputs(cfg.prepare_out_dir(), grid, report, snaps)
    drift = ", ".join(f"{d:.3e}" for d in report.final_drift)
    err = report.err_linf[-1]
    print(f"t = {state.t:g}; flux-corrected drifts [{drift}]"
          + ("" if err != err else f"; Linf error {err:.3e}") + f"; outputs in {out}")
    return EXIT_OK


def cmd_convergence(args, cfg: RunConfig) -> int:
    grid = _grid_config(args.config) if args.config else fdsim.GridConfig()
    if len(args.grids) < 2:
        raise UsageError("need at least two grids")
    order, errors, drifts = fdsim.convergence_order(grid, tuple(args.grids))
    drift_orders = fdsim.observed_orders(drifts, args.grids)
    path = _out_path(cfg, "convergence.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "errLinf", "drift1", "drift2", "drift3", "drift4"])
        for N, e, d in zip(args.grids, errors, drifts):
            w.writerow([N, repr(e), *[repr(float(x)) for x in d]])
    ok = args.min_order <= order <= args.max_order
    print(f"observed Linf order {order:.4f} ({'PASS' if ok else 'FAIL'} for "
          f"[{args.min_order}, {args.max_order}]); drift orders "
          + ", ".join(f"{o:.3f}" for o in drift_orders) + f"; wrote {path}")
    return EXIT_OK if ok else EXIT_FAIL


def _read_report(path) -> verify.Report:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    results = [verify.ClaimResult(r["group"], r["law_id"], r["system"], r["status"] == "PASS",
                                  r["residual"], r["samples"], r["notes"], r["residual_zero"] == "yes")
               for r in rows]
    return verify.Report(results)


def cmd_report(args, cfg: RunConfig) -> int:
    if args.input:
        report = _read_report(args.input)
    else:
        report = verify.run_claims(verify.VerifyOptions(samples=cfg.samples, seed=cfg.seed))
    if not report.results:
        raise UsageError("empty result set")
    text = verify.format_report(report)
    print(text)
    _out_path(cfg, "report.txt").write_text(text + "\n")
    verify.write_csv(report, _out_path(cfg, "report.csv"))
    return EXIT_OK if report.ok else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "derive": cmd_derive,
    "shock": cmd_shock,
    "simulate": cmd_simulate,
    "convergence": cmd_convergence,
    "report": cmd_report,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        _usage_from_samples(getattr(args, "samples", 3))
        cfg = RunConfig(args.command, Path(args.out_dir), args.seed, getattr(args, "samples", 3),
                        getattr(args, "system", None))
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        text = str(exc)
        if not text.lstrip().startswith("usage:"):
            text = parser.format_usage() + text
        print(text, file=sys.stderr)
        return EXIT_USAGE
    except (fdsim.ConfigError, tws.ShockDomainError, FamilyConstraintError, AnsatzGuardError,
            AnsatzTooLarge, ExprError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(dispatch(argv))
