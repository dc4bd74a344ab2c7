"""Følner box witnesses on Z/m: measured variation against the boundary formula."""

import argparse
from fractions import Fraction

from propa.constructions import (
    folner_box, folner_deficiency, folner_family, folner_project, l1_distance,
)
from propa.groups import box_space
from propa.witness import check_witness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--boxes", default="4,8,16,32")
    ap.add_argument("--R", type=int, default=2)
    args = ap.parse_args()

    print(f"{'k':>4} {'m':>5} {'eps=2R/k':>9} {'max l1':>8} {'deficiency':>10}  check")
    for k in (int(s) for s in args.boxes.split(",")):
        m = 4 * (k + args.R)
        q = box_space("zd", d=1, moduli=[m]).maps[0]
        F = folner_box(1, k)
        eps = Fraction(2 * args.R, k)
        rep = check_witness(folner_family(F, q), args.R, eps, k - 1)
        worst = max(l1_distance(folner_project(F, q, 0), folner_project(F, q, g % m))
                    for g in range(-args.R, args.R + 1))
        print(f"{k:>4} {m:>5} {str(eps):>9} {str(worst):>8} "
              f"{str(folner_deficiency(F, (args.R,))):>10}  {'ok' if rep.passed else 'FAILED'}")


if __name__ == "__main__":
    main()
