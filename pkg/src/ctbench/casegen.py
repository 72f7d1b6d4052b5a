"""Benchmark case expansion and source emission.

Every catalog record expands over per-step operation variants (access ->
read/write, targeted invalidation -> flush/remote-write, whole-cache
invalidation -> flush-all/evict-all), giving 8 operation combinations per
record.  Scheduling then decides how combinations become runnable cases:

  * single-actor records run one process, one case per combination;
  * two-actor records double each combination into a time-sliced and a
    hyper-threaded case, except combinations designated different-cores,
    which produce exactly one case:
      - combinations in which every step of the non-final actor uses the
        remote-write variant (those steps only make sense from another
        core), unless the final step is the attacker touching d;
      - for records whose final step is a victim targeted invalidation,
        the one combination with non-final steps at their first-listed
        variants and a flush final.

The same rules expand arbitrary patterns for the validation sweep.
"""

from __future__ import annotations

import enum
import fnmatch
import itertools
from dataclasses import dataclass, field

from .catalog import GOLDEN, VulnerabilityRecord, golden_by_pattern
from .derive import StepOp, classify_step_ops, derive_catalog
from .states import (
    Actor,
    Kind,
    Pattern,
    Tag,
    actors_of,
    enumerate_patterns,
    format_pattern,
    parse_pattern,
)


class ScheduleVariant(enum.Enum):
    TIME_SLICED = "ts"
    HYPER_THREADED = "ht"
    DIFFERENT_CORES = "dc"
    VICTIM_ONLY = "vo"


KNOWN_APPROXIMATION = "known-approximation"


@dataclass(frozen=True)
class BenchmarkCase:
    case_id: str
    number: int | None          # catalog number, None for validation-only
    pattern: Pattern
    ops: tuple[StepOp, StepOp, StepOp]
    schedule: ScheduleVariant
    tags: tuple[str, ...] = ()

    @property
    def final_op(self) -> StepOp:
        return self.ops[2]

    @property
    def times_twice(self) -> bool:
        """True when the final step touches the secret-dependent address,
        so the generated program records a second (repeat) timing."""
        fin = self.pattern[2]
        return (not fin.is_star) and fin.tag is Tag.U

    def line(self) -> str:
        vuln = str(self.number) if self.number is not None else "-"
        ops = "-".join(op.value for op in self.ops)
        tags = ";".join(self.tags) if self.tags else "-"
        return (
            f"{self.case_id}, {vuln}, {format_pattern(self.pattern)}, "
            f"{ops}, {self.schedule.value}, {tags}"
        )


@dataclass(frozen=True)
class Manifest:
    cases: tuple[BenchmarkCase, ...]
    run_num: int = 600
    blocks: int = 8
    alpha: float = 0.0005

    def by_id(self) -> dict[str, BenchmarkCase]:
        return {c.case_id: c for c in self.cases}

    def filtered(self, pattern: str) -> "Manifest":
        kept = tuple(
            c for c in self.cases if fnmatch.fnmatch(c.case_id, pattern)
        )
        return Manifest(kept, self.run_num, self.blocks, self.alpha)

    def render(self) -> str:
        head = [
            "# benchmark manifest",
            f"# run_num={self.run_num} blocks={self.blocks} alpha={self.alpha}",
            "# expansion rules: 2 op variants per step (read/write,",
            "#   flush/remote-write, flush-all/evict-all) = 8 combos per",
            "#   record; single-actor records -> one single-process case",
            "#   per combo; two-actor records -> time-sliced plus",
            "#   hyper-threaded case per combo, except different-cores",
            "#   designated combos (all non-final-actor steps remote-write,",
            "#   unless the final step is the attacker on d; plus the",
            "#   first-variant flush-final combo of records ending in a",
            "#   victim targeted invalidation) which yield one case.",
            "# fields: case_id, vuln, pattern, ops, schedule, tags",
        ]
        return "\n".join(head + [c.line() for c in self.cases]) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Manifest":
        run_num, blocks, alpha = 600, 8, 0.0005
        cases = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "run_num=" in line:
                    for part in line.lstrip("# ").split():
                        k, _, v = part.partition("=")
                        if k == "run_num":
                            run_num = int(v)
                        elif k == "blocks":
                            blocks = int(v)
                        elif k == "alpha":
                            alpha = float(v)
                continue
            fields = [f.strip() for f in line.split(",")]
            case_id, vuln, pattern_text, ops_text, sched, tags = fields[:6]
            ops = tuple(StepOp(tok) for tok in ops_text.split("-"))
            cases.append(
                BenchmarkCase(
                    case_id=case_id,
                    number=None if vuln == "-" else int(vuln),
                    pattern=parse_pattern(pattern_text),
                    ops=ops,
                    schedule=ScheduleVariant(sched),
                    tags=() if tags == "-" else tuple(tags.split(";")),
                )
            )
        return cls(tuple(cases), run_num, blocks, alpha)


def benchmark_step_ops(state) -> tuple[StepOp, ...]:
    """Op variants emitted for a step.  Unlike classification (where
    flush-all and evict-all coincide), benchmarks exercise both whole-cache
    variants."""
    if state.is_star:
        return (StepOp.NONE,)
    if state.tag is Tag.WHOLE:
        return (StepOp.FLUSH_ALL, StepOp.EVICT_ALL)
    return classify_step_ops(state)


def _final_actor(p: Pattern) -> Actor | None:
    return None if p[2].is_star else p[2].actor


def _non_final_actor_steps(p: Pattern) -> tuple[int, ...]:
    fin = _final_actor(p)
    return tuple(
        i
        for i, s in enumerate(p)
        if (not s.is_star) and s.actor is not None and s.actor is not fin
    )


def _dc_combos(p: Pattern) -> frozenset[tuple[StepOp, ...]]:
    """Operation combinations designated to run as different-cores cases."""
    if actors_of(p) != {Actor.ATTACKER, Actor.VICTIM}:
        return frozenset()
    designated = set()
    variants = [benchmark_step_ops(s) for s in p]

    others = _non_final_actor_steps(p)
    fin = p[2]
    attacker_d_final = (
        not fin.is_star and fin.actor is Actor.ATTACKER and fin.tag is Tag.D
    )
    if others and not attacker_d_final:
        if all(StepOp.REMOTE_WRITE in variants[i] for i in others):
            for combo in itertools.product(*variants):
                if all(combo[i] is StepOp.REMOTE_WRITE for i in others):
                    designated.add(combo)

    victim_inv_final = (
        not fin.is_star
        and fin.actor is Actor.VICTIM
        and fin.kind is Kind.INVALIDATE
        and fin.tag is not Tag.WHOLE
    )
    if victim_inv_final:
        combo = tuple(v[0] for v in variants[:2]) + (StepOp.FLUSH,)
        designated.add(combo)
    return frozenset(designated)


def _case_id(number: int | None, pattern_index: int | None,
             ops, schedule) -> str:
    stem = f"v{number:03d}" if number is not None else f"p{pattern_index:04d}"
    return f"{stem}_{'-'.join(op.value for op in ops)}_{schedule.value}"


def _expand_pattern(
    p: Pattern,
    number: int | None,
    pattern_index: int | None,
    tags: tuple[str, ...] = (),
) -> list[BenchmarkCase]:
    variants = [benchmark_step_ops(s) for s in p]
    two_actor = actors_of(p) == {Actor.ATTACKER, Actor.VICTIM}
    dc = _dc_combos(p)
    cases = []
    for combo in itertools.product(*variants):
        if not two_actor:
            schedules = (ScheduleVariant.VICTIM_ONLY,)
        elif combo in dc:
            schedules = (ScheduleVariant.DIFFERENT_CORES,)
        else:
            schedules = (
                ScheduleVariant.TIME_SLICED,
                ScheduleVariant.HYPER_THREADED,
            )
        for sched in schedules:
            cases.append(
                BenchmarkCase(
                    case_id=_case_id(number, pattern_index, combo, sched),
                    number=number,
                    pattern=p,
                    ops=combo,
                    schedule=sched,
                    tags=tags,
                )
            )
    return cases


def expand_cases(
    catalog: tuple[VulnerabilityRecord, ...] | None = None,
    run_num: int = 600,
    blocks: int = 8,
    alpha: float = 0.0005,
) -> Manifest:
    """Expand the verified catalog into the benchmark manifest."""
    if catalog is None:
        derived = derive_catalog()
        if derived.diff:
            raise ValueError(
                "catalog derivation disagrees with the reference table; "
                "refusing to expand: " + "; ".join(derived.diff[:3])
            )
        catalog = derived.strong
    golden = {g.number: g for g in GOLDEN}
    if {r.number for r in catalog} != set(golden) or any(
        r.pattern != golden[r.number].pattern for r in catalog
    ):
        raise ValueError("catalog does not match the reference table")

    cases = []
    for record in catalog:
        cases.extend(_expand_pattern(record.pattern, record.number, None))
    return Manifest(tuple(cases), run_num, blocks, alpha)


def _approximation_tags(p: Pattern) -> tuple[str, ...]:
    flagged = any(
        s.is_star or s.tag is Tag.WHOLE for s in (p[1], p[2])
    )
    return (KNOWN_APPROXIMATION,) if flagged else ()


def emit_validation_suite(
    run_num: int = 600, blocks: int = 8, alpha: float = 0.0005
) -> Manifest:
    """Manifest covering every pattern; catalog cases keep their ids."""
    golden = golden_by_pattern()
    cases = []
    for idx, p in enumerate(enumerate_patterns()):
        g = golden.get(p)
        tags = _approximation_tags(p)
        if g is not None:
            cases.extend(_expand_pattern(p, g.number, None, tags))
        else:
            cases.extend(_expand_pattern(p, None, idx, tags))
    return Manifest(tuple(cases), run_num, blocks, alpha)


# --- benchmark source emission ------------------------------------------
#
# Each case becomes one standalone C program linked against the harness
# runtime.  Program shape: the final-step actor runs on the local hardware
# thread; the other actor's thread placement follows the schedule; any
# remote-write step always executes from a thread on another physical
# core.  A shared token array sequences the steps, a candidate loop tries
# u = a, a's alias, and an unrelated same-set-structure address, and a
# fourth dummy branch runs last with its timing discarded.

_PLACEMENTS = ("local", "peer", "remote")

_SCHEDULE_PHRASE = {
    ScheduleVariant.TIME_SLICED: "same core, time-sliced",
    ScheduleVariant.HYPER_THREADED: "same core, hyper-threaded",
    ScheduleVariant.DIFFERENT_CORES: "different physical cores",
    ScheduleVariant.VICTIM_ONLY: "single victim process",
}

_ACTOR_WORD = {Actor.ATTACKER: "attacker", Actor.VICTIM: "victim"}

_TARGET_WORD = {
    Tag.U: "u (the candidate address)",
    Tag.A: "a",
    Tag.ALIAS: "a's alias",
    Tag.D: "d",
}

_ROW_EXPR = {Tag.A: "c->row_a", Tag.ALIAS: "c->row_alias", Tag.D: "c->row_d"}

_OP_KIND = {
    StepOp.READ: "CTB_OP_READ",
    StepOp.WRITE: "CTB_OP_WRITE",
    StepOp.FLUSH: "CTB_OP_FLUSH",
    StepOp.REMOTE_WRITE: "CTB_OP_WRITE",
}

_CAND_ROWS = (
    ("CAND_A", "c->row_a"),
    ("CAND_ALIAS", "c->row_alias"),
    ("CAND_NIB", "c->row_nib"),
)


def step_placements(case: BenchmarkCase) -> tuple[str, str, str]:
    """Thread placement per step: local, peer, or remote."""
    fin = _final_actor(case.pattern)
    out = []
    for state, op in zip(case.pattern, case.ops):
        if op is StepOp.REMOTE_WRITE:
            out.append("remote")
        elif state.is_star or fin is None or state.actor is fin:
            out.append("local")
        else:
            out.append("peer")
    return tuple(out)


def _step_comment(index: int, state, op: StepOp) -> str:
    actor = "context" if state.is_star else _ACTOR_WORD[state.actor]
    if op is StepOp.NONE:
        return f"step {index}: unconstrained context step (no operation)"
    if op is StepOp.FLUSH_ALL:
        return f"step {index}: {actor} invalidates the whole cache (flush-all)"
    if op is StepOp.EVICT_ALL:
        return f"step {index}: {actor} invalidates the whole cache (evict-all)"
    target = _TARGET_WORD[state.tag]
    if op is StepOp.READ:
        return f"step {index}: {actor} reads {target}"
    if op is StepOp.WRITE:
        return f"step {index}: {actor} writes {target}"
    if op is StepOp.FLUSH:
        return f"step {index}: {actor} flushes {target}"
    return (
        f"step {index}: {actor} invalidates {target} by a write "
        "from another physical core"
    )


def _whole_cache_lines(op: StepOp, timed: bool) -> list[str]:
    kind = "flush-all" if op is StepOp.FLUSH_ALL else "evict-all"
    lines = [
        f"/* {kind} approximated at user level by flushing every tracked",
        " * address; no privileged whole-cache instruction is used */",
    ]
    flushes = [
        f"ctb_op(CTB_OP_FLUSH, {row});"
        for row in ("c->row_a", "c->row_alias", "c->row_d", "c->row_nib")
    ]
    if timed:
        lines.append("t0 = ctb_tsc_begin();")
        lines.extend(flushes)
        lines.append("t_first = ctb_tsc_end() - t0;")
    else:
        lines.extend(flushes)
    return lines


def _candidate_branch(state, op: StepOp, assign: str | None) -> list[str]:
    """if/else chain over u candidates; the dummy branch is always last."""
    kind = _OP_KIND[op]
    lines = []
    for i, (cand, row) in enumerate(_CAND_ROWS):
        key = "if" if i == 0 else "else if"
        if assign is None:
            lines.append(f"{key} (cand == {cand}) ctb_op({kind}, {row});")
        else:
            lines.append(
                f"{key} (cand == {cand}) {assign}ctb_timed_op({kind}, {row});"
            )
    lines.append("else ctb_dummy_op();  /* dummy branch, timing discarded */")
    return lines


def _step_lines(case: BenchmarkCase, index: int) -> list[str]:
    """Body for one step inside its owning process, without sequencing."""
    state = case.pattern[index]
    op = case.ops[index]
    timed = index == 2
    lines = [f"/* {_step_comment(index + 1, state, op)} */"]

    if op is StepOp.NONE:
        return lines  # nothing to execute or time

    if op in (StepOp.FLUSH_ALL, StepOp.EVICT_ALL):
        lines.extend(_whole_cache_lines(op, timed))
        return lines

    if state.tag is Tag.U:
        if timed:
            lines.extend(_candidate_branch(state, op, "t_first = "))
            lines.append("/* final step touches u: time an immediate repeat */")
            lines.extend(
                _candidate_branch(state, op, "t_second = (long long)")
            )
        else:
            lines.extend(_candidate_branch(state, op, None))
        return lines

    row = _ROW_EXPR[state.tag]
    kind = _OP_KIND[op]
    if timed:
        lines.append(f"t_first = ctb_timed_op({kind}, {row});")
    else:
        lines.append(f"ctb_op({kind}, {row});")
    return lines


def _process_function(case: BenchmarkCase, placement: str,
                      placements: tuple[str, str, str]) -> list[str]:
    owned = [i for i, p in enumerate(placements) if p == placement]
    writes = 2 in owned and not case.pattern[2].is_star
    fin = _final_actor(case.pattern)
    role = {
        "local": f"{_ACTOR_WORD.get(fin, 'victim')} steps on the local thread",
        "peer": "other actor's steps on the schedule-paired thread",
        "remote": "remote-write steps from another physical core",
    }[placement]

    body: list[str] = []
    if placement == "local":
        body += [
            "/* trial reset: return every tracked line to memory */",
            "ctb_flush_tracked(c->layout);",
            "ctb_seq_publish(c->seq, 0, tok);",
        ]
    for i in owned:
        body.append("")
        body.append(f"if (ctb_seq_wait(c->seq, {i}, tok))")
        body.append("    return CTB_EXIT_SEQ_TIMEOUT;")
        body.extend(_step_lines(case, i))
        body.append(f"ctb_seq_publish(c->seq, {i + 1}, tok);")
        if i == 2 and writes:
            body += [
                "if (cand != CAND_DUMMY)",
                "    ctb_writer_sample(w, kCandName[cand], trial, 0,",
                "                      t_first, t_second);",
            ]
    body += [
        "",
        "/* end-of-trial barrier */",
        "if (ctb_seq_wait(c->seq, N_SLOTS - 1, tok))",
        "    return CTB_EXIT_SEQ_TIMEOUT;",
    ]

    lines = [f"/* {role} */", f"static int run_{placement}(shared_ctx_t *c)", "{"]
    if writes:
        lines += [
            "    ctb_writer_t *w = ctb_writer_open(c->out_path, kCaseId);",
            "    if (!w)",
            "        return CTB_EXIT_USAGE;",
        ]
    lines += [
        "    for (int cand = 0; cand < N_CAND; cand++) {",
        "        for (long trial = 0; trial < c->run_num; trial++) {",
        "            long tok = SEQ_TOKEN(cand, c->run_num, trial);",
    ]
    if writes:
        lines.append("            uint64_t t_first = 0, t0 = 0;")
        lines.append("            long long t_second = -1;")
        lines.append("            (void)t0;")
    for raw in body:
        lines.append(f"            {raw}" if raw else "")
    lines += [
        "        }",
        "    }",
    ]
    if writes:
        lines.append("    ctb_writer_close(w);")
    lines += [
        "    return CTB_EXIT_OK;",
        "}",
    ]
    return lines


def _schedule_check_lines(case: BenchmarkCase, used: tuple[str, ...]) -> list[str]:
    sched = case.schedule
    lines = []
    if "peer" in used:
        if sched is ScheduleVariant.TIME_SLICED:
            lines += [
                "    if (tid_peer != tid_local) {",
                '        fprintf(stderr, "time-sliced case runs both actors '
                'on one hardware thread\\n");',
                "        return CTB_EXIT_SKIP_SCHEDULE;",
                "    }",
            ]
        elif sched is ScheduleVariant.HYPER_THREADED:
            lines += [
                "    if (tid_peer == tid_local) {",
                '        fprintf(stderr, "hyper-threaded case needs sibling '
                'hardware threads (-p)\\n");',
                "        return CTB_EXIT_SKIP_SCHEDULE;",
                "    }",
            ]
        elif sched is ScheduleVariant.DIFFERENT_CORES:
            lines += [
                "    if (tid_peer == tid_local) {",
                '        fprintf(stderr, "different-cores case needs a thread '
                'on another core (-p)\\n");',
                "        return CTB_EXIT_SKIP_SCHEDULE;",
                "    }",
            ]
    if "remote" in used:
        lines += [
            "    if (tid_remote == tid_local) {",
            '        fprintf(stderr, "remote-write steps need a thread on '
            'another physical core (-r)\\n");',
            "        return CTB_EXIT_SKIP_SCHEDULE;",
            "    }",
        ]
    return lines


def _peer_default(case: BenchmarkCase) -> str:
    if case.schedule is ScheduleVariant.TIME_SLICED:
        return "tid_local"
    if case.schedule is ScheduleVariant.HYPER_THREADED:
        return "1"
    return "2"


def emit_benchmark_source(case: BenchmarkCase, run_num: int = 600) -> str:
    """Standalone C source for one case, byte-stable across calls."""
    placements = step_placements(case)
    used = tuple(p for p in _PLACEMENTS if p == "local" or p in placements)
    vuln = f"#{case.number}" if case.number is not None else "validation-only"
    tags = ", ".join(case.tags) if case.tags else "none"
    ops = "-".join(op.value for op in case.ops)

    out = [
        "/* generated benchmark case; regenerate instead of editing",
        f" * case:      {case.case_id}",
        f" * catalog:   {vuln}",
        f" * pattern:   {format_pattern(case.pattern)}",
        f" * step ops:  {ops}",
        f" * schedule:  {_SCHEDULE_PHRASE[case.schedule]}",
        f" * tags:      {tags}",
        " */",
        "#define _POSIX_C_SOURCE 200809L",
        "",
        '#include "ctbench_harness.h"',
        "",
        "#include <stdio.h>",
        "#include <stdlib.h>",
        "#include <sys/types.h>",
        "#include <sys/wait.h>",
        "#include <unistd.h>",
        "",
        f'static const char *const kCaseId = "{case.case_id}";',
        "",
        f"#define DEFAULT_RUN_NUM {run_num}",
        "#define N_SLOTS 4  /* trial reset plus three steps */",
        "",
        "enum { CAND_A, CAND_ALIAS, CAND_NIB, CAND_DUMMY, N_CAND };",
        'static const char *const kCandName[] = {"A", "ALIAS", "NIB", "DUMMY"};',
        "",
        "/* token 0 means never published, so trial tokens start at 1 */",
        "#define SEQ_TOKEN(cand, run_num, trial) \\",
        "    ((long)(cand) * (run_num) + (trial) + 1)",
        "",
        "typedef struct {",
        "    ctb_layout_t *layout;",
        "    ctb_seq_t *seq;",
        "    volatile uint8_t *const *row_a;",
        "    volatile uint8_t *const *row_alias;",
        "    volatile uint8_t *const *row_d;",
        "    volatile uint8_t *const *row_nib;",
        "    long run_num;",
        "    const char *out_path;",
        "} shared_ctx_t;",
        "",
    ]

    for placement in used:
        out.extend(_process_function(case, placement, placements))
        out.append("")

    fork_children = [p for p in used if p != "local"]
    out += [
        "int main(int argc, char **argv)",
        "{",
        "    long run_num = DEFAULT_RUN_NUM;",
        f'    const char *out_path = "{case.case_id}.samples";',
        "    int tid_local = 0, tid_peer = -1, tid_remote = 2;",
        "    int opt;",
        "",
        '    while ((opt = getopt(argc, argv, "l:p:r:n:o:")) != -1) {',
        "        switch (opt) {",
        "        case 'l': tid_local = atoi(optarg); break;",
        "        case 'p': tid_peer = atoi(optarg); break;",
        "        case 'r': tid_remote = atoi(optarg); break;",
        "        case 'n': run_num = atol(optarg); break;",
        "        case 'o': out_path = optarg; break;",
        "        default:",
        '            fprintf(stderr, "usage: %s [-l tid] [-p tid] [-r tid]'
        ' [-n run_num] [-o path]\\n", argv[0]);',
        "            return CTB_EXIT_USAGE;",
        "        }",
        "    }",
        "    if (tid_peer < 0)",
        f"        tid_peer = {_peer_default(case)};",
        "    (void)tid_peer;",
        "    (void)tid_remote;",
        "",
    ]
    out.extend(_schedule_check_lines(case, used))
    out += [
        "    if (!ctb_have_clflush()) {",
        '        fprintf(stderr, "host lacks a user-level line flush\\n");',
        "        return CTB_EXIT_SKIP_CAPABILITY;",
        "    }",
        "",
        "    shared_ctx_t ctx;",
        "    ctx.layout = ctb_layout_create();",
        "    ctx.seq = ctb_seq_create(N_SLOTS);",
        "    if (!ctx.layout || !ctx.seq)",
        "        return CTB_EXIT_USAGE;",
        '    ctx.row_a = ctb_role(ctx.layout, "a");',
        '    ctx.row_alias = ctb_role(ctx.layout, "alias");',
        '    ctx.row_d = ctb_role(ctx.layout, "d");',
        '    ctx.row_nib = ctb_role(ctx.layout, "nib");',
        "    ctx.run_num = run_num;",
        "    ctx.out_path = out_path;",
        "",
    ]
    for child in fork_children:
        tid = "tid_peer" if child == "peer" else "tid_remote"
        out += [
            f"    pid_t pid_{child} = fork();",
            f"    if (pid_{child} < 0) {{",
            '        perror("fork");',
            "        return CTB_EXIT_USAGE;",
            "    }",
            f"    if (pid_{child} == 0) {{",
            f"        if (ctb_pin_to_hardware_thread({tid}))",
            "            _exit(CTB_EXIT_SKIP_SCHEDULE);",
            f"        _exit(run_{child}(&ctx));",
            "    }",
            "",
        ]
    out += [
        "    if (ctb_pin_to_hardware_thread(tid_local))",
        "        return CTB_EXIT_SKIP_SCHEDULE;",
        "    int rc = run_local(&ctx);",
    ]
    for child in fork_children:
        out += [
            "    {",
            "        int status = 0;",
            f"        waitpid(pid_{child}, &status, 0);",
            "        int child_rc = WIFEXITED(status) ? WEXITSTATUS(status)",
            "                                         : CTB_EXIT_SEQ_TIMEOUT;",
            "        if (rc == CTB_EXIT_OK && child_rc != CTB_EXIT_OK)",
            "            rc = child_rc;",
            "    }",
        ]
    out += [
        "    ctb_seq_destroy(ctx.seq);",
        "    ctb_layout_destroy(ctx.layout);",
        "    return rc;",
        "}",
    ]
    return "\n".join(out) + "\n"


def write_sources(manifest: Manifest, directory) -> list:
    """One C file per case plus the manifest; returns written paths."""
    from pathlib import Path

    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    paths = []
    manifest_path = root / "manifest.txt"
    manifest_path.write_text(manifest.render())
    paths.append(manifest_path)
    src_dir = root / "cases"
    src_dir.mkdir(exist_ok=True)
    for case in manifest.cases:
        path = src_dir / f"{case.case_id}.c"
        path.write_text(emit_benchmark_source(case, manifest.run_num))
        paths.append(path)
    return paths
