#!/usr/bin/env python3
"""Empirical false-positive rate of the per-case judgment on null data.

Every candidate draws from one distribution, so any Found verdict is a
false positive. With three pairwise tests per case the rate must stay
below 3 * alpha; in practice it sits well under that because a false
Found needs two dependent tests to fire at once.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ctbench.analysis import Verdict, judge_case
from ctbench.synth import synthesize_null


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--cases", type=int, default=20000)
    ap.add_argument("--run-num", type=int, default=60)
    ap.add_argument("--alpha", type=float, default=0.0005)
    args = ap.parse_args()

    ids = [f"null{i:06d}_r-r-r_vo" for i in range(args.cases)]
    found = 0
    for cid in ids:
        s = synthesize_null([cid], run_num=args.run_num)[cid]
        v = judge_case(s, u_last_step=False, alpha=args.alpha)
        if v.verdict is Verdict.FOUND:
            found += 1
    rate = found / args.cases
    bound = 3 * args.alpha
    print(f"{found}/{args.cases} null cases judged Found "
          f"(rate {rate:.2%}, bound {bound:.2%})")
    return 0 if rate <= bound else 1


if __name__ == "__main__":
    sys.exit(main())
