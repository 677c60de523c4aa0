"""Run the full exact-verification matrix and write the consolidated report.

    python scripts/run_verification.py --out-dir out/verify --samples 5 --seed 1

Exits 0 when every row passes and 1 otherwise.
"""

import argparse
import sys
from pathlib import Path

from westervelt import verify


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="out/verify")
    ap.add_argument("--samples", type=int, default=3, help="parameter samples per f family")
    ap.add_argument("--seed", type=int, default=0, help="seed for samples beyond the fixed three")
    ap.add_argument("--mutate", action="append", default=[], help="flip-phi1, perturb-all or perturb:<id>")
    args = ap.parse_args(argv)
    report = verify.run_claims(verify.VerifyOptions(samples=args.samples, seed=args.seed,
                                                    mutations=tuple(args.mutate)))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(verify.format_report(report) + "\n")
    verify.write_csv(report, out / "report.csv")
    print(verify.format_text(report, notes=False))
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
