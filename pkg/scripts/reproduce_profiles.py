"""Write the shock-front profiles as CSV for external plotting.

For each exponent n and each speed parameter c the script writes a
``(xi, U)`` profile and a ``(t, x, U)`` space-time table, plus a small
summary of the amplitudes.

    python scripts/reproduce_profiles.py --out-dir out/profiles
"""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from westervelt import tws


@dataclass
class ProfileStudy:
    exponents: tuple = (2.0, 3.0)
    speeds: tuple = (2.0, 3.0, 4.0)
    nu: float = 1.0
    beta: float = 1.0
    kappa: float = 1.0
    U0: float = 1.0
    xi_range: tuple = (-10.0, 10.0)
    samples: int = 401
    times: list = field(default_factory=lambda: [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="out/profiles")
    ap.add_argument("--samples", type=int, default=ProfileStudy.samples)
    args = ap.parse_args(argv)
    study = ProfileStudy(samples=args.samples)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    xis = np.linspace(*study.xi_range, study.samples)
    summary = []
    for n in study.exponents:
        for c in study.speeds:
            p = tws.TWParams(c=c, nu=study.nu, beta=study.beta, kappa=study.kappa, n=n, U0=study.U0)
            tag = f"n{n:g}_c{c:g}"
            tws.write_profile(out / f"profile_{tag}.csv", tws.profile_table(p, xis))
            tws.write_profile(out / f"spacetime_{tag}.csv", tws.profile_table(p, xis, study.times),
                              spacetime=True)
            summary.append((n, c, tws.amplitude(p), tws.residual_check(p, xis)))
    with (out / "amplitudes.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "c", "amplitude", "max_ode_residual"])
        for row in summary:
            w.writerow([repr(float(v)) for v in row])
    for n, c, amp, res in summary:
        print(f"n={n:g} c={c:g}: amplitude {amp:.10g}, first-order ODE residual {res:.1e}")
    print(f"wrote {2 * len(summary) + 1} files to {out}")


if __name__ == "__main__":
    main()
