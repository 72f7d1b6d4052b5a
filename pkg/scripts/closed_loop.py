#!/usr/bin/env python3
"""Closed-loop experiment: model-predicted samples through the judge.

Synthesizes timing samples from the cache model under a chosen
distinguishability assumption and scores them, so the whole pipeline can
be exercised with no hardware. The ideal matrix must recover all 88
catalog types; the fully merged matrix must recover none.

Usage:
  python3 scripts/closed_loop.py                 # ideal matrix
  python3 scripts/closed_loop.py --merged        # nothing distinguishable
  python3 scripts/closed_loop.py --groups out/groups.csv   # calibrated host
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ctbench.analysis import DistinguishabilityMatrix, ctvs, judge_case
from ctbench.casegen import expand_cases
from ctbench.derive import predict_effective
from ctbench.synth import synthesize_manifest


def load_groups(path: str) -> dict:
    groups = {}
    for line in Path(path).read_text().splitlines()[1:]:
        if line.strip():
            class_id, group_id = (int(f) for f in line.split(","))
            groups[class_id] = group_id
    return groups


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--merged", action="store_true",
                    help="use the nothing-distinguishable matrix")
    ap.add_argument("--groups", help="groups.csv from ctbench calibrate")
    ap.add_argument("--run-num", type=int, default=600)
    args = ap.parse_args()

    if args.groups:
        groups = load_groups(args.groups)
        label = args.groups
    elif args.merged:
        groups = DistinguishabilityMatrix.nothing().groups()
        label = "merged"
    else:
        groups = None
        label = "ideal"

    manifest = expand_cases(run_num=args.run_num)
    by_id = manifest.by_id()
    samples = synthesize_manifest(manifest, groups=groups)
    verdicts = [
        judge_case(s, by_id[cid].times_twice, manifest.alpha)
        for cid, s in samples.items()
    ]
    report = ctvs(verdicts)
    predicted = len(predict_effective(groups))
    print(f"matrix: {label}")
    print(f"measured score: {report.score}/88  (model predicts "
          f"{predicted}/88)")
    for cat, (num, den) in report.fractions.items():
        print(f"  {cat}: {num}/{den}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
