"""Benchmark case expansion, manifest serialization, validation sweep."""

from collections import Counter, defaultdict

import pytest

from ctbench.casegen import (
    KNOWN_APPROXIMATION,
    BenchmarkCase,
    Manifest,
    ScheduleVariant,
    benchmark_step_ops,
    emit_benchmark_source,
    emit_validation_suite,
    expand_cases,
    step_placements,
    write_sources,
)
from ctbench.catalog import GOLDEN
from ctbench.derive import StepOp
from ctbench.states import enumerate_patterns, parse_pattern, parse_state


@pytest.fixture(scope="module")
def manifest():
    return expand_cases()


@pytest.fixture(scope="module")
def by_number(manifest):
    grouped = defaultdict(list)
    for c in manifest.cases:
        grouped[c.number].append(c)
    return grouped


def test_step_op_variants():
    assert benchmark_step_ops(parse_state("A_a")) == (StepOp.READ, StepOp.WRITE)
    assert benchmark_step_ops(parse_state("V_u^inv")) == (
        StepOp.FLUSH,
        StepOp.REMOTE_WRITE,
    )
    assert benchmark_step_ops(parse_state("A^inv")) == (
        StepOp.FLUSH_ALL,
        StepOp.EVICT_ALL,
    )
    assert benchmark_step_ops(parse_state("*")) == (StepOp.NONE,)


class TestExpansion:
    def test_total_case_count(self, manifest):
        assert len(manifest.cases) == 1094

    def test_schedule_split(self, manifest):
        counts = Counter(c.schedule for c in manifest.cases)
        assert counts[ScheduleVariant.TIME_SLICED] == 390
        assert counts[ScheduleVariant.HYPER_THREADED] == 390
        assert counts[ScheduleVariant.DIFFERENT_CORES] == 90
        assert counts[ScheduleVariant.VICTIM_ONLY] == 224

    def test_final_op_split(self, manifest):
        counts = Counter(c.final_op for c in manifest.cases)
        assert counts[StepOp.READ] == 277
        assert counts[StepOp.WRITE] == 277
        assert counts[StepOp.REMOTE_WRITE] == 277
        assert counts[StepOp.FLUSH] == 263

    def test_different_cores_final_ops(self, manifest):
        dc = [
            c
            for c in manifest.cases
            if c.schedule is ScheduleVariant.DIFFERENT_CORES
        ]
        counts = Counter(c.final_op for c in dc)
        assert counts[StepOp.READ] == 19
        assert counts[StepOp.WRITE] == 19
        assert counts[StepOp.REMOTE_WRITE] == 19
        assert counts[StepOp.FLUSH] == 33

    def test_per_record_bounds(self, by_number):
        assert set(by_number) == {g.number for g in GOLDEN}
        sizes = {n: len(cs) for n, cs in by_number.items()}
        assert min(sizes.values()) == 8
        assert max(sizes.values()) == 16

    def test_case_ids_unique(self, manifest):
        ids = [c.case_id for c in manifest.cases]
        assert len(set(ids)) == len(ids)

    def test_expansion_deterministic(self, manifest):
        again = expand_cases()
        assert again == manifest

    def test_rejects_mismatched_catalog(self):
        bad = GOLDEN[:-1]
        with pytest.raises(ValueError):
            expand_cases(catalog=bad)


class TestScheduleRules:
    def test_victim_only_record(self, by_number):
        # all-victim record: one process, eight op combinations
        cases = by_number[2]
        assert len(cases) == 8
        assert all(c.schedule is ScheduleVariant.VICTIM_ONLY for c in cases)
        ops = {"-".join(o.value for o in c.ops) for c in cases}
        assert ops == {
            "F-r-r", "F-r-w", "F-w-r", "F-w-w",
            "E-r-r", "E-r-w", "E-w-r", "E-w-w",
        }

    def test_remote_write_combos_become_different_cores(self, by_number):
        # attacker's only step is a targeted invalidation; its remote-write
        # variant runs on the other core, so those combos collapse to one case
        cases = by_number[3]
        dc_ops = {
            "-".join(o.value for o in c.ops)
            for c in cases
            if c.schedule is ScheduleVariant.DIFFERENT_CORES
        }
        assert dc_ops == {"m-r-r", "m-r-w", "m-w-r", "m-w-w"}
        assert len(cases) == 12  # 4 dc + 4 remaining combos * (ts, ht)

    def test_victim_invalidation_final_gets_flush_probe(self, by_number):
        # record 45 ends in a victim targeted invalidation; one designated
        # flush-final combo runs across cores, everything else doubles
        cases = by_number[45]
        dc = [
            c for c in cases if c.schedule is ScheduleVariant.DIFFERENT_CORES
        ]
        assert len(dc) == 1
        assert "-".join(o.value for o in dc[0].ops) == "F-r-f"
        assert len(cases) == 15

    def test_both_rules_can_combine(self, by_number):
        # record 47 triggers both designations: remote-write combos plus the
        # flush-final probe
        cases = by_number[47]
        dc_ops = sorted(
            "-".join(o.value for o in c.ops)
            for c in cases
            if c.schedule is ScheduleVariant.DIFFERENT_CORES
        )
        assert dc_ops == ["f-r-f", "m-r-f", "m-r-m", "m-w-f", "m-w-m"]
        assert len(cases) == 11

    def test_two_remote_steps(self, by_number):
        cases = by_number[23]
        dc_ops = {
            "-".join(o.value for o in c.ops)
            for c in cases
            if c.schedule is ScheduleVariant.DIFFERENT_CORES
        }
        assert dc_ops == {"m-m-r", "m-m-w"}
        assert len(cases) == 14

    def test_attacker_d_final_never_different_cores(self, by_number):
        gold = {g.number: g.pattern for g in GOLDEN}
        checked = 0
        for num, pattern in gold.items():
            fin = pattern[2]
            if fin.is_star or fin.actor.value != "A" or fin.tag is None:
                continue
            if fin.tag.value != "d":
                continue
            checked += 1
            assert all(
                c.schedule is not ScheduleVariant.DIFFERENT_CORES
                for c in by_number[num]
            ), num
        assert checked > 0


class TestManifestFormat:
    def test_round_trip(self, manifest):
        text = manifest.render()
        parsed = Manifest.parse(text)
        assert parsed == manifest
        assert parsed.render() == text

    def test_round_trip_preserves_params(self, manifest):
        small = Manifest(manifest.cases[:4], run_num=50, blocks=2, alpha=0.01)
        parsed = Manifest.parse(small.render())
        assert parsed.run_num == 50
        assert parsed.blocks == 2
        assert parsed.alpha == 0.01

    def test_case_id_shape(self, manifest):
        c = manifest.by_id()["v001_F-r-r_ts"]
        assert c.number == 1
        assert c.ops == (StepOp.FLUSH_ALL, StepOp.READ, StepOp.READ)
        assert c.schedule is ScheduleVariant.TIME_SLICED

    def test_filtered_by_glob(self, manifest):
        sub = manifest.filtered("v001_*")
        assert len(sub.cases) == 16
        assert all(c.number == 1 for c in sub.cases)
        assert sub.run_num == manifest.run_num

    def test_line_for_validation_case(self):
        case = BenchmarkCase(
            case_id="p0001_r-r-r_vo",
            number=None,
            pattern=parse_pattern("V_u ~> V_a ~> V_a"),
            ops=(StepOp.READ, StepOp.READ, StepOp.READ),
            schedule=ScheduleVariant.VICTIM_ONLY,
            tags=(KNOWN_APPROXIMATION,),
        )
        assert case.line() == (
            "p0001_r-r-r_vo, -, V_u ~> V_a ~> V_a, r-r-r, vo, "
            "known-approximation"
        )


@pytest.fixture(scope="module")
def suite():
    return emit_validation_suite()


class TestSourceEmission:
    def test_emission_deterministic(self, manifest):
        case = manifest.by_id()["v042_r-w-w_ht"]
        assert emit_benchmark_source(case) == emit_benchmark_source(case)

    def test_two_actor_program_shape(self, manifest):
        src = emit_benchmark_source(manifest.by_id()["v042_r-w-w_ht"])
        assert "fork()" in src
        assert "run_local" in src and "run_peer" in src
        assert "ctb_seq_wait" in src and "ctb_seq_publish" in src
        assert "ctb_pin_to_hardware_thread" in src
        assert "#define DEFAULT_RUN_NUM 600" in src

    def test_candidate_branches_and_doubled_timing(self, manifest):
        # both u steps branch over the candidates; the timed final step is
        # immediately repeated for the second reading
        src = emit_benchmark_source(manifest.by_id()["v042_r-w-w_ht"])
        assert src.count("cand == CAND_A)") == 3
        assert src.count("cand == CAND_ALIAS)") == 3
        assert src.count("cand == CAND_NIB)") == 3
        assert src.count("ctb_dummy_op()") == 3
        assert "t_second = (long long)ctb_timed_op" in src
        assert "time an immediate repeat" in src

    def test_dummy_branch_comes_last(self, manifest):
        src = emit_benchmark_source(manifest.by_id()["v042_r-w-w_ht"])
        for chunk in src.split("/* step")[1:]:
            block = chunk.split("ctb_seq_publish")[0]
            if "cand == CAND_A" not in block:
                continue
            assert block.rindex("ctb_dummy_op") > block.rindex("CAND_NIB")

    def test_dummy_timing_never_recorded(self, manifest):
        src = emit_benchmark_source(manifest.by_id()["v042_r-w-w_ht"])
        assert "if (cand != CAND_DUMMY)" in src
        assert src.index("cand != CAND_DUMMY") < src.index("ctb_writer_sample")

    def test_non_u_final_has_single_timing(self, manifest):
        src = emit_benchmark_source(manifest.by_id()["v001_F-r-r_ts"])
        assert src.count("ctb_timed_op") == 1
        assert "t_second = (long long)" not in src

    def test_victim_only_runs_one_process(self, manifest):
        src = emit_benchmark_source(manifest.by_id()["v002_F-r-r_vo"])
        assert "fork()" not in src
        assert "run_peer" not in src and "run_remote" not in src

    def test_whole_cache_flush_loop_with_comment(self, manifest):
        src = emit_benchmark_source(manifest.by_id()["v001_F-r-r_ts"])
        assert "flush-all approximated at user level" in src
        for row in ("row_a", "row_alias", "row_d", "row_nib"):
            assert f"ctb_op(CTB_OP_FLUSH, c->{row});" in src

    def test_evict_all_variant_is_marked(self, manifest):
        src = emit_benchmark_source(manifest.by_id()["v001_E-r-r_ts"])
        assert "evict-all approximated at user level" in src

    def test_remote_write_runs_on_remote_core(self, manifest):
        case = manifest.by_id()["v003_m-r-r_dc"]
        assert step_placements(case) == ("remote", "local", "local")
        src = emit_benchmark_source(case)
        assert "run_remote" in src
        assert "run_peer" not in src

    def test_remote_write_final_owns_the_writer(self, manifest):
        case = manifest.by_id()["v047_m-r-m_dc"]
        src = emit_benchmark_source(case)
        remote_fn = src.split("static int run_remote")[1].split("int main")[0]
        assert "ctb_writer_open" in remote_fn
        assert "ctb_timed_op" in remote_fn

    def test_schedule_gates(self, manifest):
        ts = emit_benchmark_source(manifest.by_id()["v042_r-w-w_ts"])
        assert "tid_peer != tid_local" in ts
        ht = emit_benchmark_source(manifest.by_id()["v042_r-w-w_ht"])
        assert "tid_peer == tid_local" in ht
        assert "CTB_EXIT_SKIP_SCHEDULE" in ht
        assert "CTB_EXIT_SKIP_CAPABILITY" in ht

    def test_star_step_is_a_comment_only(self, suite):
        case = next(
            c for c in suite.cases
            if c.pattern[1].is_star and not c.pattern[0].is_star
            and not c.pattern[2].is_star
        )
        src = emit_benchmark_source(case)
        assert "unconstrained context step (no operation)" in src

    def test_write_sources_layout(self, manifest, tmp_path):
        sub = manifest.filtered("v001_*")
        paths = write_sources(sub, tmp_path / "gen")
        assert (tmp_path / "gen" / "manifest.txt").read_text() == sub.render()
        c_files = sorted((tmp_path / "gen" / "cases").glob("*.c"))
        assert len(c_files) == 16
        assert len(paths) == 17
        first = sub.cases[0]
        written = (tmp_path / "gen" / "cases" / f"{first.case_id}.c")
        assert written.read_text() == emit_benchmark_source(first, sub.run_num)


class TestValidationSuite:
    def test_covers_every_pattern(self, suite):
        covered = {c.pattern for c in suite.cases}
        assert covered == set(enumerate_patterns())

    def test_catalog_ids_survive(self, suite, manifest):
        ids = {c.case_id for c in suite.cases}
        assert {c.case_id for c in manifest.cases} <= ids

    def test_approximation_tagging(self, suite):
        for c in suite.cases:
            flagged = any(
                s.is_star or (s.tag is not None and s.tag.value == "whole")
                for s in (c.pattern[1], c.pattern[2])
            )
            assert (KNOWN_APPROXIMATION in c.tags) == flagged, c.case_id

    def test_round_trip(self, suite):
        parsed = Manifest.parse(suite.render())
        assert parsed == suite
