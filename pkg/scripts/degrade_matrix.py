#!/usr/bin/env python3
"""What breaks when a host cannot tell certain timings apart.

Starts from the ideal distinguishability matrix, merges chosen families
of timing classes, and reports how many catalog types survive. Useful
for reasoning about hosts before measuring them (no L3 timing contrast,
write-back buffers hiding dirtiness, and so on).
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ctbench.derive import predict_effective

# movement-type families within one operation column (1..22)
LEVELS_LOCAL = {1: "L1", 2: "L2", 3: "L3"}
_BOTH = [(n, f) for n in (1, 2, 3) for f in (1, 2, 3)]


def merge(groups: dict, class_ids) -> None:
    ids = sorted(class_ids)
    root = groups[ids[0]]
    for c in ids[1:]:
        old = groups[c]
        for k, v in groups.items():
            if v == old:
                groups[k] = root


def ideal() -> dict:
    return {c: c for c in range(1, 67)}


def scenario_no_l3_contrast() -> dict:
    """L3 hits time like DRAM for every operation."""
    g = ideal()
    for op in (0, 1, 2):
        merge(g, [22 * op + 3, 22 * op + 6, 22 * op + 13])
    return g


def scenario_no_dirtiness() -> dict:
    """Dirty lines answer as fast as clean ones (write-back hiding)."""
    g = ideal()
    for op in (0, 1, 2):
        for level in (1, 2, 3):
            merge(g, [22 * op + level, 22 * op + level + 6])
            merge(g, [22 * op + level + 3, 22 * op + level + 9])
    return g


def scenario_flat_writes() -> dict:
    """Store buffering makes every write the same."""
    g = ideal()
    merge(g, [22 + m for m in range(1, 23)])
    return g


def scenario_no_remote_contrast() -> dict:
    """Remote-cached lines indistinguishable from DRAM."""
    g = ideal()
    for op in (0, 1, 2):
        merge(g, [22 * op + 4, 22 * op + 5, 22 * op + 6,
                  22 * op + 10, 22 * op + 11, 22 * op + 12,
                  22 * op + 13])
    return g


def main() -> int:
    scenarios = [
        ("ideal", ideal()),
        ("no L3/DRAM contrast", scenario_no_l3_contrast()),
        ("no clean/dirty contrast", scenario_no_dirtiness()),
        ("flat write timing", scenario_flat_writes()),
        ("no remote/DRAM contrast", scenario_no_remote_contrast()),
    ]
    print(f"{'scenario':<28} {'score':>8}  lost types")
    for name, groups in scenarios:
        surviving = predict_effective(groups)
        kept = {r.number for r in surviving}
        lost = sorted(set(range(1, 89)) - kept)
        shown = ", ".join(str(n) for n in lost[:12])
        if len(lost) > 12:
            shown += ", ..."
        print(f"{name:<28} {len(surviving):>5}/88  {shown or '-'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
