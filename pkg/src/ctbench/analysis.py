"""Statistical judgment of measured samples.

Converts raw per-candidate timing samples into per-case verdicts with
Welch's t-tests, aggregates verdicts into the vulnerability score, and
builds timing-class histograms plus the distinguishability matrix from
calibration runs.

Conventions fixed here:
  * two-tailed tests, alpha 0.0005 by default;
  * a case is Found when exactly one candidate is significantly
    different from both others; if all three differ pairwise, the
    candidate with the largest minimum |t| wins, and an exact tie means
    NotFound (stricter than strictly necessary, documented);
  * a t_second of -1 marks "no second timing" and disables the
    first-minus-second confirmation;
  * degenerate zero-variance inputs: equal means give p = 1, unequal
    give p = 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .casegen import KNOWN_APPROXIMATION
from .catalog import CATEGORY_DENOMINATORS, GOLDEN

# timing classes are 1..66: 22 movement types x {read, write, flush}
N_CLASSES = 66

CANDIDATES = ("A", "ALIAS", "NIB")

_PAIRS = (("A", "ALIAS"), ("A", "NIB"), ("ALIAS", "NIB"))


@dataclass(frozen=True)
class TTestResult:
    t: float
    dof: float
    p: float


@dataclass
class SampleSet:
    """Per-candidate (t_first, t_second) pairs for one benchmark case."""

    case_id: str
    run_num: int
    groups: dict      # candidate -> array of shape (n, 2)
    host: str = ""

    def complete(self) -> bool:
        return all(
            c in self.groups and len(self.groups[c]) >= self.run_num
            for c in CANDIDATES
        )


class Verdict(enum.Enum):
    FOUND = "Found"
    NOT_FOUND = "NotFound"
    INCOMPLETE = "Incomplete"
    SKIPPED = "Skipped"
    FOUND_SCREENED = "Found-Screened"


@dataclass(frozen=True)
class CaseVerdict:
    case_id: str
    verdict: Verdict
    candidate: str | None
    p_values: tuple = ()
    note: str = ""

    def line(self) -> str:
        cand = self.candidate if self.candidate else "-"
        ps = ";".join(f"{p:.3e}" for p in self.p_values) or "-"
        note = self.note if self.note else "-"
        return f"{self.case_id}, {self.verdict.value}, {cand}, {ps}, {note}"


def welch_t(x, y) -> TTestResult:
    """Welch's two-sample t-test, two-tailed."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or y.size < 2:
        raise ValueError("welch_t needs at least two samples per side")
    nx, ny = x.size, y.size
    mx, my = x.mean(), y.mean()
    vx, vy = x.var(ddof=1), y.var(ddof=1)
    if vx == 0.0 and vy == 0.0:
        return TTestResult(0.0, 0.0, 1.0 if mx == my else 0.0)
    se2 = vx / nx + vy / ny
    t = (mx - my) / math.sqrt(se2)
    dof = se2 * se2 / (
        (vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1)
    )
    # stdtr(dof, -|t|) is the upper tail of the t distribution at |t|
    p = 2.0 * float(special.stdtr(dof, -abs(t)))
    return TTestResult(float(t), float(dof), min(p, 1.0))


def _flag_unique(groups: dict, alpha: float):
    """The candidate whose distribution differs from both others.

    Returns (candidate | None, pairwise p tuple, note).  With three
    pairwise edges the per-candidate significant-edge count is 0, 1 or 2,
    so the flagged set has size 0, 1 or 3; the size-3 case falls to the
    largest-minimum-|t| tie-break.
    """
    tests = {pair: welch_t(groups[pair[0]], groups[pair[1]]) for pair in _PAIRS}
    p_values = tuple(tests[pair].p for pair in _PAIRS)
    significant = {pair for pair in _PAIRS if tests[pair].p < alpha}

    def edges(cand):
        return [pair for pair in _PAIRS if cand in pair]

    flagged = [
        cand
        for cand in CANDIDATES
        if all(pair in significant for pair in edges(cand))
    ]
    if not flagged:
        return None, p_values, ""
    if len(flagged) == 1:
        return flagged[0], p_values, ""
    strength = {
        cand: min(abs(tests[pair].t) for pair in edges(cand))
        for cand in flagged
    }
    best = max(strength.values())
    winners = [cand for cand in flagged if strength[cand] == best]
    if len(winners) == 1:
        return (
            winners[0],
            p_values,
            "all three candidates differ; tie-break by largest minimum |t|",
        )
    return None, p_values, "all three candidates differ; exact tie"


def judge_case(s: SampleSet, u_last_step: bool,
               alpha: float = 0.0005) -> CaseVerdict:
    """Per-case verdict from pairwise Welch tests on the first timings."""
    for cand in CANDIDATES:
        g = s.groups.get(cand)
        if g is None or len(g) < s.run_num:
            return CaseVerdict(
                s.case_id, Verdict.INCOMPLETE, None,
                note=f"candidate {cand} group incomplete",
            )
    firsts = {c: np.asarray(s.groups[c], dtype=float)[:, 0] for c in CANDIDATES}
    flagged, p_values, note = _flag_unique(firsts, alpha)
    if flagged is None:
        return CaseVerdict(s.case_id, Verdict.NOT_FOUND, None, p_values, note)

    if u_last_step:
        seconds = {
            c: np.asarray(s.groups[c], dtype=float)[:, 1] for c in CANDIDATES
        }
        have_seconds = all((arr != -1.0).all() for arr in seconds.values())
        if have_seconds:
            diffs = {c: firsts[c] - seconds[c] for c in CANDIDATES}
            confirm, _, _ = _flag_unique(diffs, alpha)
            if confirm != flagged:
                return CaseVerdict(
                    s.case_id, Verdict.NOT_FOUND, None, p_values,
                    note="first-minus-second differences do not confirm "
                         "the first-timing candidate",
                )
    return CaseVerdict(s.case_id, Verdict.FOUND, flagged, p_values, note)


# --- scoring --------------------------------------------------------------

@dataclass(frozen=True)
class CtvsReport:
    score: int
    fractions: dict      # category -> (found, denominator)
    detail: dict         # catalog number -> tuple of Found case ids

    def render(self) -> str:
        cats = " ".join(
            f"{cat}={num}/{den}" for cat, (num, den) in self.fractions.items()
        )
        lines = [f"score: {self.score}/88", f"categories: {cats}"]
        for number in sorted(self.detail):
            lines.append(f"  #{number}: " + ", ".join(self.detail[number]))
        return "\n".join(lines) + "\n"

    def csv_lines(self) -> list[str]:
        out = ["category, found, denominator"]
        for cat, (num, den) in self.fractions.items():
            out.append(f"{cat}, {num}, {den}")
        out.append(f"total, {self.score}, 88")
        return out


def _record_number(case_id: str) -> int | None:
    stem = case_id.split("_", 1)[0]
    if stem.startswith("v") and stem[1:].isdigit():
        return int(stem[1:])
    return None


def ctvs(verdicts, catalog=GOLDEN) -> CtvsReport:
    """Score: number of catalog types with at least one Found case."""
    records = {r.number: r for r in catalog}
    found_cases: dict[int, list[str]] = {}
    for v in verdicts:
        if v.verdict is not Verdict.FOUND:
            continue
        number = _record_number(v.case_id)
        if number is None or number not in records:
            continue
        found_cases.setdefault(number, []).append(v.case_id)

    fractions = {cat: [0, den] for cat, den in CATEGORY_DENOMINATORS.items()}
    for number in found_cases:
        fractions[records[number].category][0] += 1
    return CtvsReport(
        score=len(found_cases),
        fractions={cat: (num, den) for cat, (num, den) in fractions.items()},
        detail={n: tuple(sorted(ids)) for n, ids in found_cases.items()},
    )


def false_positive_screen(verdicts, tags: dict) -> list:
    """Downgrade Found verdicts on known-approximation cases.

    Cases whose second or third step needs the user-level whole-cache or
    unconstrained-context approximation can show real timing differences
    the model does not promise; those Found verdicts are kept visible but
    marked screened.
    """
    out = []
    for v in verdicts:
        if v.verdict is Verdict.FOUND and KNOWN_APPROXIMATION in tags.get(
            v.case_id, ()
        ):
            out.append(
                replace(
                    v,
                    verdict=Verdict.FOUND_SCREENED,
                    note="step uses a user-level approximation; counted "
                         "as a false positive",
                )
            )
        else:
            out.append(v)
    return out


# --- calibration ------------------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    class_id: int
    start: int                 # cycle value of the first 1-cycle bin
    counts: tuple              # per-bin counts up to the 99.5th percentile
    overflow: int
    mean: float

    def csv_lines(self) -> list[str]:
        out = [
            f"{self.class_id}, {self.start + i}, {c}"
            for i, c in enumerate(self.counts)
        ]
        out.append(f"{self.class_id}, {self.start + len(self.counts)}, "
                   f"{self.overflow}")
        return out


@dataclass(frozen=True)
class DistinguishabilityMatrix:
    """Pairwise timing-class distinguishability on one host.

    Class ids run 1..66.  Rows of classes the host never produced are all
    False and listed in `absent`; such classes stay singleton groups
    rather than merging with everything (no evidence either way).
    """

    matrix: tuple               # 66 rows of 66 bools, index = class id - 1
    absent: frozenset = frozenset()

    @classmethod
    def from_array(cls, array, absent=()) -> "DistinguishabilityMatrix":
        a = np.asarray(array, dtype=bool)
        if a.shape != (N_CLASSES, N_CLASSES):
            raise ValueError(f"matrix must be {N_CLASSES}x{N_CLASSES}")
        if not (a == a.T).all() or a.diagonal().any():
            raise ValueError("matrix must be symmetric with a False diagonal")
        rows = tuple(tuple(bool(v) for v in row) for row in a)
        return cls(rows, frozenset(absent))

    @classmethod
    def ideal(cls) -> "DistinguishabilityMatrix":
        a = ~np.eye(N_CLASSES, dtype=bool)
        return cls.from_array(a)

    @classmethod
    def nothing(cls) -> "DistinguishabilityMatrix":
        a = np.zeros((N_CLASSES, N_CLASSES), dtype=bool)
        return cls.from_array(a)

    def distinguishable(self, i: int, j: int) -> bool:
        return self.matrix[i - 1][j - 1]

    def groups(self) -> dict:
        """Class id -> group id (a member class id), merging mutually
        indistinguishable classes by connected components.

        Plugs straight into pattern classification as its groups map.
        """
        parent = list(range(N_CLASSES + 1))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(1, N_CLASSES + 1):
            if i in self.absent:
                continue
            for j in range(i + 1, N_CLASSES + 1):
                if j in self.absent:
                    continue
                if not self.matrix[i - 1][j - 1]:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[rj] = ri
        return {i: find(i) for i in range(1, N_CLASSES + 1)}


def make_histogram(class_id: int, samples) -> Histogram:
    values = np.asarray(samples, dtype=float)
    cutoff = float(np.percentile(values, 99.5))
    start = int(math.floor(values.min()))
    last = int(math.ceil(cutoff))
    edges = np.arange(start, last + 2)       # 1-cycle bins [start, last+1)
    counts, _ = np.histogram(values[values <= last], bins=edges)
    overflow = int((values > last).sum())
    return Histogram(
        class_id=class_id,
        start=start,
        counts=tuple(int(c) for c in counts),
        overflow=overflow,
        mean=float(values.mean()),
    )


def calibrate(samples: dict, alpha: float = 0.0005):
    """Histograms plus the distinguishability matrix from labeled probe
    runs, one sample array per timing class id (1..66)."""
    present = {
        cid: np.asarray(vals, dtype=float)
        for cid, vals in samples.items()
        if vals is not None and len(vals) >= 2
    }
    absent = frozenset(range(1, N_CLASSES + 1)) - set(present)
    histograms = {
        cid: make_histogram(cid, vals) for cid, vals in present.items()
    }
    matrix = np.zeros((N_CLASSES, N_CLASSES), dtype=bool)
    ids = sorted(present)
    for pos, i in enumerate(ids):
        for j in ids[pos + 1:]:
            if welch_t(present[i], present[j]).p < alpha:
                matrix[i - 1][j - 1] = matrix[j - 1][i - 1] = True
    return histograms, DistinguishabilityMatrix.from_array(matrix, absent)


# --- sample files -----------------------------------------------------------

def sample_line(case_id: str, candidate: str, trial: int, block: int,
                t_first: int, t_second: int) -> str:
    """One sample record; t_second is -1 when no second timing exists."""
    return (f"{case_id}, {candidate}, {trial}, {block}, "
            f"{int(t_first)}, {int(t_second)}")


def parse_samples(text: str, run_num: int) -> dict:
    """Sample lines to SampleSets, keyed by case id.

    Line format: case_id, candidate, trial_index, block_index,
    t_first_cycles, t_second_cycles_or_-1.  Lines starting with # are
    comments.
    """
    staged: dict[str, dict[str, list]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 6:
            raise ValueError(f"sample line {lineno}: expected 6 fields")
        case_id, cand, trial, _block, t_first, t_second = fields
        if cand not in CANDIDATES:
            raise ValueError(f"sample line {lineno}: unknown candidate {cand!r}")
        staged.setdefault(case_id, {c: [] for c in CANDIDATES})[cand].append(
            (int(trial), float(t_first), float(t_second))
        )
    out = {}
    for case_id, groups in staged.items():
        arrays = {}
        for cand, rows in groups.items():
            rows.sort()
            arrays[cand] = np.array(
                [(t1, t2) for _, t1, t2 in rows], dtype=float
            ).reshape(-1, 2)
        out[case_id] = SampleSet(case_id=case_id, run_num=run_num,
                                 groups=arrays)
    return out
