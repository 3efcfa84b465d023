"""Compare the symbolic tracing index with a numeric count of conjugate branches.

    python scripts/tracing_bruteforce.py --eq "y' - y*sqrt(x^3-1)" [--points 3]
"""

import argparse
import random

from radcoef.frontend.expr import Declarations, parse_equation
from radcoef.frontend.extract import extract_tower
from radcoef.oracle import conjugate_count, random_rational
from radcoef.tower import tracing_index
from radcoef.transformer import radical_coefficients


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eq", action="append", required=True)
    ap.add_argument("--vars", default="x")
    ap.add_argument("--unknowns", default="y")
    ap.add_argument("--params", default="")
    ap.add_argument("--points", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    split = lambda s: tuple(n for n in s.replace(",", " ").split() if n)
    decl = Declarations(split(args.vars), split(args.unknowns), split(args.params))
    tower, polys, reg = extract_tower([parse_equation(e, decl) for e in args.eq], decl)
    coeffs = radical_coefficients(tower, polys)
    if not coeffs:
        print("no radical coefficients")
        return
    report = tracing_index(tower, coeffs, seed=args.seed)
    print(f"symbolic: D={report.total_degree} image degree={report.image_degree} "
          f"T={report.index} certified={report.certified}")
    rng = random.Random(args.seed)
    free = reg.names_of("param") + reg.names_of("base")
    radicals = [reg.var(s.name) for s in tower.steps]
    done = 0
    while done < args.points:
        point = {reg.index[n]: random_rational(rng, 50) for n in free}
        # skip branch points, where distinct conjugate tuples coincide
        if conjugate_count(tower, radicals, point) != 1:
            continue
        print(f"x0 = {[str(v) for v in point.values()]}: "
              f"numeric conjugate count {conjugate_count(tower, coeffs, point)}")
        done += 1


if __name__ == "__main__":
    main()
