"""Command-line workflows, run in-process."""

import json

import numpy as np
import pytest

from ctbench.cli import Topology, TopologyError, main, parse_verdicts
from ctbench.analysis import Verdict
from ctbench.casegen import expand_cases
from ctbench.synth import render_sample_text, synthesize_manifest


def test_derive_reports_clean_catalog(capsys):
    assert main(["derive"]) == 0
    assert capsys.readouterr().out.strip() == "88 Strong, 80 Weak, diff empty"


def test_catalog_prints_every_row(capsys):
    assert main(["catalog"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 89  # header + 88 records
    assert "Flush + Reload" in lines[5]


def test_gen_writes_sources(tmp_path, capsys):
    out = tmp_path / "gen"
    assert main(["gen", "--out", str(out), "--only", "v005_*"]) == 0
    files = sorted(p.name for p in (out / "cases").glob("*.c"))
    assert len(files) == 16
    assert "v005_f-r-r_ts.c" in files
    assert (out / "manifest.txt").exists()


def test_topology_helper_output_loads(tmp_path, capsys):
    assert main(["topology"]) == 0
    text = capsys.readouterr().out
    path = tmp_path / "topo.json"
    path.write_text(text)
    topo = Topology.load(path)
    assert topo.cores


class TestTopology:
    def test_rejects_duplicate_thread(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"cores": [[0, 1], [1, 2]], "smt": True}))
        with pytest.raises(TopologyError):
            Topology.load(path)

    def test_rejects_smt_contradiction(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"cores": [[0], [1]], "smt": True}))
        with pytest.raises(TopologyError):
            Topology.load(path)

    def test_thread_selection(self):
        topo = Topology(cores=((0, 4), (1, 5)), smt=True)
        assert topo.thread_ids("ts") == (0, 0, 1)
        assert topo.thread_ids("ht") == (0, 4, 1)
        assert topo.thread_ids("dc") == (0, 1, 1)
        assert topo.thread_ids("vo") == (0, 0, 1)

    def test_unhostable_schedules(self):
        single = Topology(cores=((0,),), smt=False)
        assert single.thread_ids("ht") is None
        assert single.thread_ids("dc") is None
        assert single.thread_ids("ts") == (0, 0, 0)


@pytest.fixture(scope="module")
def small_flow(tmp_path_factory):
    """Synthetic samples for one catalog record, analyzed and scored."""
    root = tmp_path_factory.mktemp("flow")
    manifest = expand_cases().filtered("v005_*")
    samples = synthesize_manifest(manifest, groups=None)
    sample_path = root / "samples.txt"
    sample_path.write_text(render_sample_text(samples))
    return root, manifest, sample_path


def test_analyze_then_score(small_flow, capsys):
    root, manifest, sample_path = small_flow
    # analyze judges only the filtered cases: the golden manifest is the
    # default, so --only narrows it to the same record
    assert main(["analyze", str(sample_path), "--out", str(root),
                 "--only", "v005_*"]) == 0
    out = capsys.readouterr().out
    assert "cases judged" in out
    verdicts = parse_verdicts((root / "verdicts.csv").read_text())
    assert len(verdicts) == 16
    assert any(v.verdict is Verdict.FOUND for v in verdicts)

    assert main(["score", str(root / "verdicts.csv"),
                 "--out", str(root)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("score: 1/88")
    assert (root / "ctvs.csv").read_text().splitlines()[1] == "I-A, 0, 20"


def test_verdict_round_trip(small_flow):
    root, manifest, sample_path = small_flow
    main(["analyze", str(sample_path), "--out", str(root),
          "--only", "v005_*"])
    text = (root / "verdicts.csv").read_text()
    verdicts = parse_verdicts(text)
    lines = ["case_id, verdict, candidate, p_values, note"]
    lines += [v.line() for v in verdicts]
    assert parse_verdicts("\n".join(lines) + "\n") == verdicts


def test_analyze_missing_samples(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", str(tmp_path / "nope.txt")])
    assert exc.value.code == 2


def test_run_skip_secondary_collects_recorded(tmp_path, capsys):
    out = tmp_path / "runout"
    (out / "samples").mkdir(parents=True)
    (out / "samples" / "v005_f-r-r_ts.samples").write_text(
        "v005_f-r-r_ts, A, 0, 0, 100, -1\n"
    )
    assert main(["run", "--only", "v005_*", "--out", str(out),
                 "--topology", _topo(tmp_path), "--skip-secondary"]) == 0
    coverage = (out / "coverage.txt").read_text().splitlines()
    assert coverage[0].startswith("# governor:")
    assert len(coverage) == 17
    assert "v005_f-r-r_ts, -, recorded" in coverage
    assert sum(1 for c in coverage if c.endswith("missing")) == 15
    assert (out / "samples.txt").read_text().startswith("v005_f-r-r_ts, A")


def test_run_missing_binaries_logged(tmp_path):
    out = tmp_path / "runout"
    assert main(["run", str(tmp_path / "nobin"), "--only", "v005_f-r-r_*",
                 "--out", str(out), "--topology", _topo(tmp_path)]) == 0
    coverage = (out / "coverage.txt").read_text()
    assert "missing-binary" in coverage


def _topo(tmp_path):
    path = tmp_path / "topo.json"
    path.write_text(json.dumps({"cores": [[0], [1]], "smt": False}))
    return str(path)


def test_calibrate_flow(tmp_path, capsys):
    rng = np.random.default_rng(3)
    lines = []
    for cid, mean in ((1, 40.0), (13, 300.0), (2, 40.0)):
        for v in rng.normal(mean, 2.0, 200):
            lines.append(f"{cid}, {v:.1f}")
    path = tmp_path / "cal.txt"
    path.write_text("\n".join(lines) + "\n")
    out = tmp_path / "calout"
    assert main(["calibrate", str(path), "--out", str(out)]) == 0
    assert "3 classes present, 63 absent" in capsys.readouterr().out
    groups = {}
    for line in (out / "groups.csv").read_text().splitlines()[1:]:
        c, g = (int(f) for f in line.split(","))
        groups[c] = g
    assert groups[1] == groups[2] != groups[13]
    hist = (out / "histograms.csv").read_text()
    assert hist.startswith("class_id, bin_low, count")


def test_validate_null_subset(tmp_path, capsys):
    out = tmp_path / "val"
    assert main(["validate", "--out", str(out), "--run-num", "8",
                 "--only", "p00[0-4]*"]) == 0
    printed = capsys.readouterr().out
    assert "unscreened Found outside Strong/Weak/repeat sets: 0" in printed
    assert (out / "validation-manifest.txt").exists()
    assert (out / "verdicts.csv").exists()


def test_bad_alpha_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--out", str(tmp_path), "--alpha", "0.7",
              "--only", "v005_*"])
    assert exc.value.code == 2
