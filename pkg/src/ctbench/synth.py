"""Synthetic sample generation for closed-loop testing.

Replaces the hardware with the cache model: for every benchmark case and
candidate the final step's predicted timing class is computed by running
the case's exact operation variants and core placement through the
simulator, then samples are drawn from a per-class normal distribution.

Class means are assigned per distinguishability group using a Sidon
sequence (all pairwise differences distinct), so two timing classes in
different groups never collide in the first timing nor in the
first-minus-second difference used by the confirmation test.

Two generators:
  * synthesize_case / synthesize_manifest: model-faithful samples, for
    the closed loop (an ideal matrix must recover every catalog type, a
    fully merged matrix none);
  * synthesize_null: one shared distribution for everything, for
    false-positive measurement.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from . import cachesim
from .analysis import CANDIDATES, SampleSet, sample_line
from .casegen import BenchmarkCase, Manifest, ScheduleVariant
from .derive import _FINAL_OBSERVE, Schedule, StepOp, _exec_step, step_cores
from .states import Candidate, Tag, substitute_candidate

_CAND_BY_NAME = {
    "A": Candidate.A,
    "ALIAS": Candidate.ALIAS,
    "NIB": Candidate.NIB,
}

_SIM_SCHEDULE = {
    ScheduleVariant.TIME_SLICED: Schedule.SAME_CORE,
    ScheduleVariant.HYPER_THREADED: Schedule.SAME_CORE,
    ScheduleVariant.VICTIM_ONLY: Schedule.SAME_CORE,
    ScheduleVariant.DIFFERENT_CORES: Schedule.DIFFERENT_CORES,
}


def _mian_chowla(n: int) -> list[int]:
    """First n terms of the greedy Sidon sequence (1, 2, 4, 8, 13, ...)."""
    terms: list[int] = []
    diffs: set[int] = set()
    k = 1
    while len(terms) < n:
        new = [k - t for t in terms]
        if len(set(new)) == len(new) and not diffs.intersection(new):
            diffs.update(new)
            terms.append(k)
        k += 1
    return terms


@dataclass(frozen=True)
class SynthConfig:
    sigma: float = 5.0
    base_cycles: int = 100
    scale: int = 4          # cycles per Sidon unit; >= 7 sigma / sqrt(n)
    seed: int = 20260814


def group_means(groups, config: SynthConfig = SynthConfig()) -> dict:
    """Timing class id -> synthetic mean, one mean per group.

    groups: None for the ideal matrix (every class its own group), else a
    class_id -> group_id map as produced by DistinguishabilityMatrix.
    """
    if groups is None:
        groups = {c: c for c in range(1, 67)}
    ranks = {g: i for i, g in enumerate(sorted(set(groups.values())))}
    sidon = _mian_chowla(len(ranks))
    return {
        c: config.base_cycles + config.scale * sidon[ranks[g]]
        for c, g in groups.items()
    }


def predicted_classes(case: BenchmarkCase, candidate: str):
    """(first, second) timing classes of the case's final step, or None
    per slot when that timing does not exist.

    first is a tuple of possible classes (one per reachable world; more
    than one only when the pattern has unconstrained-context steps),
    second likewise, aligned with first.  The second timing exists only
    when the final step touches the secret-dependent address.
    """
    pattern = case.pattern
    final = pattern[2]
    if final.is_star or final.tag is Tag.WHOLE:
        return None, None

    steps = substitute_candidate(pattern, _CAND_BY_NAME[candidate])
    cores = step_cores(pattern, _SIM_SCHEDULE[case.schedule])
    worlds = set(cachesim.initial_worlds(star_context=pattern[0].is_star))
    for i in (0, 1):
        step, op = steps[i], case.ops[i]
        if step.is_star:
            if i == 0:
                continue
            worlds = {s for w in worlds for s in cachesim.star_successors(w)}
        else:
            worlds = {_exec_step(w, step, op, cores[i]) for w in worlds}

    obs_op, observer = _FINAL_OBSERVE[case.ops[2]]
    firsts, seconds = [], []
    timed_twice = final.tag is Tag.U
    for w in sorted(worlds, key=repr):
        firsts.append(cachesim.observe(w, obs_op, steps[2].tag, observer))
        if timed_twice:
            after = _exec_step(w, steps[2], case.ops[2], cores[2])
            seconds.append(cachesim.observe(after, obs_op, steps[2].tag,
                                            observer))
    return tuple(firsts), (tuple(seconds) if timed_twice else None)


def _case_rng(case_id: str, seed: int) -> np.random.Generator:
    return np.random.default_rng((seed, zlib.crc32(case_id.encode())))


def synthesize_case(
    case: BenchmarkCase,
    means: dict,
    run_num: int = 600,
    config: SynthConfig = SynthConfig(),
) -> SampleSet | None:
    """Model-faithful samples for one case; None when the case's final
    step is never timed (the generated program writes no samples)."""
    rng = _case_rng(case.case_id, config.seed)
    groups = {}
    for cand in CANDIDATES:
        first_classes, second_classes = predicted_classes(case, cand)
        if first_classes is None:
            return None
        pick = rng.integers(0, len(first_classes), size=run_num)
        mu1 = np.array([means[first_classes[i]] for i in pick], dtype=float)
        t_first = np.rint(rng.normal(mu1, config.sigma))
        if second_classes is None:
            t_second = np.full(run_num, -1.0)
        else:
            mu2 = np.array(
                [means[second_classes[i]] for i in pick], dtype=float
            )
            t_second = np.rint(rng.normal(mu2, config.sigma))
        groups[cand] = np.column_stack([t_first, t_second])
    return SampleSet(case_id=case.case_id, run_num=run_num, groups=groups,
                     host="synthetic")


def synthesize_manifest(
    manifest: Manifest,
    groups=None,
    config: SynthConfig = SynthConfig(),
) -> dict:
    """Case id -> SampleSet for every timed case in the manifest."""
    means = group_means(groups, config)
    out = {}
    for case in manifest.cases:
        s = synthesize_case(case, means, manifest.run_num, config)
        if s is not None:
            out[case.case_id] = s
    return out


def synthesize_null(
    case_ids,
    run_num: int = 600,
    mean: float = 200.0,
    sigma: float = 10.0,
    seed: int = 20260814,
    second: bool = False,
) -> dict:
    """Every candidate of every case from one distribution (no signal)."""
    out = {}
    for case_id in case_ids:
        rng = _case_rng(case_id, seed)
        groups = {}
        for cand in CANDIDATES:
            t_first = np.rint(rng.normal(mean, sigma, size=run_num))
            if second:
                t_second = np.rint(rng.normal(mean, sigma, size=run_num))
            else:
                t_second = np.full(run_num, -1.0)
            groups[cand] = np.column_stack([t_first, t_second])
        out[case_id] = SampleSet(case_id=case_id, run_num=run_num,
                                 groups=groups, host="synthetic-null")
    return out


def render_sample_text(sample_sets: dict) -> str:
    """SampleSets to the on-disk sample-line format."""
    lines = []
    for case_id in sorted(sample_sets):
        s = sample_sets[case_id]
        for cand in CANDIDATES:
            for trial, (t1, t2) in enumerate(s.groups[cand]):
                lines.append(sample_line(case_id, cand, trial, 0,
                                         int(t1), int(t2)))
    return "\n".join(lines) + "\n"
