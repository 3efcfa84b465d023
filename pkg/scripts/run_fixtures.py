"""Run every bundled fixture and print status, transformed equation and oracle residual.

    python scripts/run_fixtures.py [--extra] [--seed N]
"""

import argparse
import time
from pathlib import Path

import radcoef
from radcoef.cli import load_job, run_transform

FIXTURES = Path(radcoef.__file__).parent / "fixtures"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--extra", action="store_true", help="include the negative cases")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    files = sorted(FIXTURES.glob("*.eq"))
    if args.extra:
        files += sorted((FIXTURES / "extra").glob("*.eq"))
    for path in files:
        cfg = load_job(path)
        cfg.seed = args.seed
        t0 = time.perf_counter()
        code, report, _ = run_transform(cfg)
        dt = time.perf_counter() - t0
        print(f"== {path.name}: {report['status']} (exit {code}, {dt:.2f}s)")
        for eq in report["transformed"]["equations"]:
            print(f"   {eq['text']} = 0")
        if report["back_substitution"]:
            print(f"   back-substitution: {', '.join(report['back_substitution'])}")
        if report["oracle"]:
            chain = report["oracle"]["chain"]
            print(f"   chain residual {chain['max_relative_residual']:.2e} "
                  f"({'pass' if chain['passed'] else 'FAIL'})")


if __name__ == "__main__":
    main()
