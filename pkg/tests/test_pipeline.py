import json
import time

import pytest

from ticketforge.engine import Query, query
from ticketforge.pipeline import (
    STAGES,
    PipelineConfig,
    load_run,
    report,
    run_pipeline,
)


@pytest.fixture(scope="module")
def full_run(fixture_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    config = PipelineConfig(input_path=str(fixture_path), out_dir=str(out))
    started = time.perf_counter()
    manifest = run_pipeline(config)
    elapsed = time.perf_counter() - started
    return config, manifest, out, elapsed


class TestConfig:
    def test_unknown_stage_rejected(self, fixture_path, tmp_path):
        with pytest.raises(ValueError):
            PipelineConfig(str(fixture_path), str(tmp_path), stages=("ingest", "bogus"))

    def test_stages_must_be_prefix(self, fixture_path, tmp_path):
        with pytest.raises(ValueError):
            PipelineConfig(str(fixture_path), str(tmp_path), stages=("ingest", "smt"))

    def test_from_mapping_reads_sections(self, fixture_path, tmp_path):
        config = PipelineConfig.from_mapping({
            "pipeline": {"input": str(fixture_path), "out": str(tmp_path), "seed": 3},
            "topics": {"n_topics": 5, "threshold": 0.3},
            "summarize": {"window": 10, "budget": 1},
        })
        assert config.seed == 3
        assert config.n_topics == 5
        assert config.topic_threshold == 0.3
        assert config.summary_window == 10


class TestStageGating:
    def test_ingest_only(self, fixture_path, tmp_path):
        config = PipelineConfig(str(fixture_path), str(tmp_path), stages=("ingest",))
        manifest = run_pipeline(config)
        assert [s.name for s in manifest.stages] == ["ingest"]
        assert (tmp_path / "tickets.jsonl").exists()
        assert not (tmp_path / "topics.json").exists()


class TestFullRun:
    def test_runs_under_a_minute(self, full_run):
        _, _, _, elapsed = full_run
        assert elapsed < 60.0

    def test_every_stage_present_with_conserved_counts(self, full_run):
        _, manifest, _, _ = full_run
        assert [s.name for s in manifest.stages] == list(STAGES)
        ingest = manifest.stages[0]
        assert ingest.records_in == 1000
        assert ingest.records_out == 1000
        index = manifest.stages[-1]
        assert index.records_out == 1000

    def test_insights_cover_every_ticket(self, full_run):
        _, _, out, _ = full_run
        holder, _, _ = load_run(out)
        docs = holder.index.documents
        assert len(docs) == 1000
        assert all(ins is not None for _, ins in docs.values())

    def test_topic_coverage_threshold(self, full_run):
        _, _, out, _ = full_run
        payload = json.loads((out / "topics.json").read_text(encoding="utf-8"))
        assert payload["coverage"] >= 0.60

    def test_run_manifest_written(self, full_run):
        _, _, out, _ = full_run
        persisted = json.loads((out / "run_manifest.json").read_text(encoding="utf-8"))
        assert persisted["schema_version"] == 1
        assert len(persisted["stages"]) == len(STAGES)


class TestIncremental:
    def test_second_run_skips_every_stage(self, full_run):
        config, _, _, _ = full_run
        manifest = run_pipeline(config)
        assert all(s.skipped for s in manifest.stages)

    def test_input_change_invalidates_chain(self, fixture_path, tmp_path, fixture_records):
        lines = [json.dumps(r) for r in fixture_records[:50]]
        src = tmp_path / "tickets.jsonl"
        src.write_text("\n".join(lines) + "\n", encoding="utf-8")
        out = tmp_path / "run"
        config = PipelineConfig(str(src), str(out), stages=("ingest", "tcfe"))
        run_pipeline(config)
        src.write_text("\n".join(lines[:40]) + "\n", encoding="utf-8")
        manifest = run_pipeline(config)
        assert not any(s.skipped for s in manifest.stages)
        assert manifest.stages[0].records_in == 40


class TestDeterminism:
    def test_seeded_runs_byte_identical(self, fixture_path, tmp_path_factory):
        """Identical input + seed produce identical artifacts.  The run
        manifest is excluded: it records wall-clock stage timings."""
        outs = []
        for name in ("a", "b"):
            out = tmp_path_factory.mktemp(name)
            run_pipeline(PipelineConfig(str(fixture_path), str(out), seed=0))
            outs.append(out)
        a, b = outs
        files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
        assert files_a == files_b
        compared = 0
        for rel in files_a:
            if rel.name == "run_manifest.json":
                continue
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
            compared += 1
        assert compared > 10


class TestReports:
    def test_all_kinds_render(self, full_run):
        _, _, out, _ = full_run
        for kind in ("volume", "topics", "sla", "propagation", "csat"):
            path = report(out, kind, automatable=("account password",))
            text = path.read_text(encoding="utf-8")
            assert text.startswith(f"{kind} report")
        volume = (out / "report_volume.txt").read_text(encoding="utf-8")
        assert "reduction opportunity" in volume

    def test_unknown_kind(self, full_run):
        _, _, out, _ = full_run
        with pytest.raises(ValueError):
            report(out, "bogus")
