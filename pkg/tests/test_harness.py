"""Generators, workload runner, report emitters, CLI."""

import csv
import json
import statistics
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from clarq.harness.cli import main as cli_main
from clarq.harness.report import read_entries_csv, write_report
from clarq.harness.synth import (
    blob_separation,
    build_relational_workload,
    build_vector_workload,
    generate_corpus,
    generate_synthetic,
)
from clarq.harness.workload import (
    EntryResult,
    RunReport,
    WorkloadEntry,
    load_workload,
    run_workload,
    save_workload,
)
from conftest import harness_config


class TestGenerators:
    def test_small_scale_sizes(self, small_data):
        assert small_data.tables["movies"].row_count == 10_000
        assert small_data.tables["orders"].row_count == 10_000
        assert len(small_data.corpus) == 5_000

    def test_unknown_scale(self):
        with pytest.raises(ValueError):
            generate_synthetic(1, "galactic")

    def test_cluster_tags_unique(self, small_data):
        labels = small_data.corpus.labels
        tags = {}
        for pos, kws in enumerate(small_data.corpus.keywords):
            specific = {k for k in kws if k not in ("paper", "study")}
            assert len(specific) == 1
            tags.setdefault(labels[pos], set()).update(specific)
        all_tags = [t for s in tags.values() for t in s]
        assert len(all_tags) == len(set(all_tags)) == 50

    def test_blob_separation(self, small_data):
        assert blob_separation(small_data.corpus) >= 4.0

    def test_determinism(self):
        a = generate_corpus(5, 500, 10, 8)
        b = generate_corpus(5, 500, 10, 8)
        assert np.array_equal(a.vectors, b.vectors)
        assert a.keywords == b.keywords

    def test_workload_files_round_trip(self, tmp_path, small_data):
        rel = build_relational_workload(3, count=8)
        vec = build_vector_workload(small_data.corpus, 3, count=4, k=50)
        save_workload(rel + vec, tmp_path / "w.json")
        loaded = load_workload(tmp_path / "w.json")
        assert [e.id for e in loaded] == [e.id for e in rel + vec]
        assert loaded[0].facet_annotations == {
            k: list(v) if isinstance(v, (tuple, list)) else v
            for k, v in rel[0].facet_annotations.items()}


@pytest.fixture(scope="module")
def run(registry):
    entries = build_relational_workload(17, count=12)
    return run_workload(registry, entries, harness_config())


class TestRunner:
    def test_non_vague_entries_stay_silent_with_unit_speedup(self, run):
        controls = [e for e in run.entries if not e.vague]
        assert controls
        for e in controls:
            assert e.asked is False
            assert e.speedup == 1.0

    def test_high_cost_vague_entries_ask_and_win(self, run):
        vague = [e for e in run.entries if e.vague and not e.failed]
        asked = [e for e in vague if e.asked]
        assert len(asked) >= int(0.8 * len(vague))
        for e in asked:
            assert e.speedup > 1.0

    def test_unknown_dataset_marks_entry_failed(self, registry):
        bad = WorkloadEntry(id="bad0", nl_query="show gizmos",
                            backend="relational", reference_query="")
        good = build_relational_workload(3, count=2)
        report = run_workload(registry, [bad] + good, harness_config())
        state = {e.entry_id: e.failed for e in report.entries}
        assert state["bad0"] is True
        assert not all(state.values())

    def test_vector_entries_record_both_indexes(self, registry, small_data):
        entries = build_vector_workload(small_data.corpus, 23, count=3, k=50)
        report = run_workload(registry, entries, harness_config())
        for e in report.entries:
            assert not e.failed, e.error
            assert e.recall_vague_ivf is not None
            assert e.recall_vague_hnsw is not None
            assert e.recall_clarified_ivf >= e.recall_vague_ivf
            assert e.recall_clarified_hnsw >= e.recall_vague_hnsw


class TestReport:
    def _report(self):
        entries = [
            EntryResult(entry_id="a", backend="relational", asked=True,
                        answered=True, facet_id="col:t.x",
                        facet_kind="categorical", cost_baseline=100.0,
                        cost_clarified=40.0, speedup=2.5,
                        baseline_latency=0.02, clarified_latency=0.008,
                        vague=True),
            EntryResult(entry_id="b", backend="relational", speedup=1.0,
                        cost_baseline=10.0, cost_clarified=10.0,
                        baseline_latency=0.002, clarified_latency=0.002),
            EntryResult(entry_id="c", backend="vector", asked=True,
                        answered=True, facet_id="kw:topic",
                        facet_kind="vector-keyword", speedup=0.9,
                        cost_baseline=50.0, cost_clarified=55.0,
                        baseline_latency=0.01, clarified_latency=0.011,
                        recall_vague_ivf=0.5, recall_clarified_ivf=0.9,
                        recall_vague_hnsw=0.6, recall_clarified_hnsw=0.8,
                        vague=True),
        ]
        return RunReport(entries=entries, kappa=5000.0)

    def test_histogram_buckets_sum_to_entry_count(self):
        report = self._report()
        agg = report.aggregates()
        assert sum(agg["speedup_histogram"].values()) == agg["entry_count"]
        assert agg["speedup_histogram"]["2-4"] == 1
        assert agg["speedup_histogram"]["1.0-1.2"] == 1
        assert agg["speedup_histogram"]["0.8-1.0"] == 1

    def test_bucket_labels(self):
        agg = self._report().aggregates()
        assert list(agg["speedup_histogram"]) == [
            "<0.8", "0.8-1.0", "1.0-1.2", "1.2-1.6", "1.6-2", "2-4", ">4"]

    def test_write_and_read_back(self, tmp_path):
        report = self._report()
        paths = write_report(report, tmp_path)
        rows = read_entries_csv(paths["entries"])
        assert [e.entry_id for e in rows] == ["a", "b", "c"]
        assert rows[0].speedup == 2.5
        assert rows[2].recall_clarified_ivf == 0.9

    def test_empty_report_headers_only(self, tmp_path):
        paths = write_report(RunReport(entries=[], kappa=5000.0), tmp_path)
        lines = Path(paths["entries"]).read_text().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("entry_id,")

    def test_json_aggregates_rederivable_from_csv(self, tmp_path):
        """Independent cross-check: recompute aggregates from the CSV alone."""
        report = self._report()
        paths = write_report(report, tmp_path)
        with open(paths["aggregates"]) as fh:
            agg = json.load(fh)

        with open(paths["entries"], newline="") as fh:
            rows = list(csv.DictReader(fh))
        ok = [r for r in rows if r["failed"] == "false"]
        speedups = sorted(float(r["speedup"]) for r in ok)
        assert agg["median_speedup"] == statistics.median(speedups)
        assert agg["entry_count"] == len(ok)
        by_kind = {}
        for r in ok:
            if r["asked"] == "true" and r["facet_kind"]:
                by_kind.setdefault(r["facet_kind"], []).append(
                    float(r["speedup"]))
        for kind, vals in by_kind.items():
            assert agg["mean_speedup_by_facet_kind"][kind] == pytest.approx(
                sum(vals) / len(vals))
        ivf_vague = [float(r["recall_vague_ivf"]) for r in ok
                     if r["recall_vague_ivf"]]
        if ivf_vague:
            assert agg["recall_at_100"]["ivf"]["vague"] == pytest.approx(
                sum(ivf_vague) / len(ivf_vague))


class TestCli:
    def test_gen_stats_run_report(self, tmp_path):
        runner = CliRunner()
        data_dir = tmp_path / "data"
        out = runner.invoke(cli_main, ["gen", "--seed", "3", "--scale",
                                       "small", "--out", str(data_dir)])
        assert out.exit_code == 0, out.output
        assert (data_dir / "movies.csv").exists()
        assert (data_dir / "papers.jsonl").exists()

        out = runner.invoke(cli_main, ["ingest", str(data_dir / "movies.csv")])
        assert out.exit_code == 0
        assert json.loads(out.output)["row_count"] == 10_000

        out = runner.invoke(cli_main, ["stats", str(data_dir / "categories.csv")])
        assert out.exit_code == 0
        stats = json.loads(out.output)
        assert {s["column_name"] for s in stats} == {"category_id",
                                                     "category_name"}

    def test_run_and_report_verbs(self, tmp_path):
        runner = CliRunner()
        data_dir = tmp_path / "data"
        runner.invoke(cli_main, ["gen", "--seed", "3", "--scale", "small",
                                 "--out", str(data_dir)])
        # small relational slice for speed
        entries = build_relational_workload(3, count=6)
        save_workload(entries, data_dir / "mini.json")
        out_dir = tmp_path / "run"
        out = runner.invoke(cli_main, [
            "run", "--data", str(data_dir), "--workload",
            str(data_dir / "mini.json"), "--out", str(out_dir), "--quiet"])
        assert out.exit_code == 0, out.output
        assert (out_dir / "entries.csv").exists()
        assert (out_dir / "aggregates.json").exists()

        rpt = runner.invoke(cli_main, ["report", str(out_dir / "entries.csv")])
        assert rpt.exit_code == 0
        assert "speedup_histogram" in rpt.output

    def test_run_exits_nonzero_on_failed_entries(self, tmp_path):
        runner = CliRunner()
        data_dir = tmp_path / "data"
        runner.invoke(cli_main, ["gen", "--seed", "3", "--scale", "small",
                                 "--out", str(data_dir)])
        bad = [WorkloadEntry(id="x", nl_query="show gizmos",
                             backend="relational")]
        save_workload(bad, data_dir / "bad.json")
        out = runner.invoke(cli_main, [
            "run", "--data", str(data_dir), "--workload",
            str(data_dir / "bad.json"), "--out", str(tmp_path / "r"),
            "--quiet"])
        assert out.exit_code == 1
