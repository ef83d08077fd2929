import json

import pytest

from ticketforge import cli


@pytest.fixture(scope="module")
def small_input(fixture_path, tmp_path_factory):
    lines = fixture_path.read_text(encoding="utf-8").splitlines()[:80]
    path = tmp_path_factory.mktemp("input") / "tickets.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def indexed_run(small_input, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = cli.main(["index", "--input", str(small_input), "--out", str(out)])
    assert code == 0
    return out


class TestVerbs:
    def test_ingest_runs_single_stage(self, small_input, tmp_path, capsys):
        code = cli.main(["ingest", "--input", str(small_input), "--out", str(tmp_path)])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 and lines[0].startswith("ingest")
        assert (tmp_path / "tickets.jsonl").exists()

    def test_index_prints_every_stage(self, indexed_run, small_input, capsys):
        code = cli.main(["index", "--input", str(small_input), "--out", str(indexed_run)])
        assert code == 0
        out = capsys.readouterr().out
        assert "[skipped]" in out
        assert (indexed_run / "enriched" / "manifest.json").exists()

    def test_analyze_stops_before_models(self, small_input, tmp_path, capsys):
        code = cli.main(["analyze", "--input", str(small_input), "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "sentiments.json").exists()
        assert not (tmp_path / "rules.json").exists()


class TestExitCodes:
    def test_missing_required_flags(self, capsys):
        assert cli.main(["index"]) == 1
        assert "required" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path, capsys):
        code = cli.main(["ingest", "--input", str(tmp_path / "nope.jsonl"),
                         "--out", str(tmp_path)])
        assert code == 1

    def test_unknown_verb_is_user_error(self):
        assert cli.main(["frobnicate"]) == 1

    def test_internal_error_is_two(self, small_input, tmp_path, monkeypatch, capsys):
        def boom(config):
            raise RuntimeError("disk on fire")

        monkeypatch.setattr(cli, "run_pipeline", boom)
        code = cli.main(["ingest", "--input", str(small_input), "--out", str(tmp_path)])
        assert code == 2
        assert "internal error" in capsys.readouterr().err


class TestConfigFile:
    def write_config(self, tmp_path, small_input, out_dir):
        path = tmp_path / "ticketforge.toml"
        path.write_text(
            "[pipeline]\n"
            f'input = "{small_input}"\n'
            f'out = "{out_dir}"\n'
            "seed = 4\n"
            "[topics]\n"
            "n_topics = 4\n",
            encoding="utf-8",
        )
        return path

    def test_config_supplies_defaults(self, small_input, tmp_path, capsys):
        config = self.write_config(tmp_path, small_input, tmp_path / "out")
        assert cli.main(["--config", str(config), "ingest"]) == 0
        assert (tmp_path / "out" / "tickets.jsonl").exists()

    def test_env_var_config(self, small_input, tmp_path, monkeypatch, capsys):
        config = self.write_config(tmp_path, small_input, tmp_path / "out")
        monkeypatch.setenv("TICKETFORGE_CONFIG", str(config))
        assert cli.main(["ingest"]) == 0
        assert (tmp_path / "out" / "tickets.jsonl").exists()

    def test_flags_override_config(self, small_input, tmp_path, capsys):
        config = self.write_config(tmp_path, small_input, tmp_path / "ignored")
        assert cli.main(["--config", str(config), "ingest",
                         "--out", str(tmp_path / "flag_out")]) == 0
        assert (tmp_path / "flag_out" / "tickets.jsonl").exists()
        assert not (tmp_path / "ignored").exists()


class TestReportVerb:
    def test_volume_report(self, indexed_run, capsys):
        code = cli.main(["report", "--run-dir", str(indexed_run), "--kind", "volume"])
        assert code == 0
        assert "volume report" in capsys.readouterr().out

    def test_automatable_flag(self, indexed_run, capsys):
        code = cli.main([
            "report", "--run-dir", str(indexed_run), "--kind", "volume",
            "--automatable", "account password",
        ])
        assert code == 0
        assert "reduction opportunity" in capsys.readouterr().out

    def test_bad_kind_rejected(self, indexed_run, capsys):
        assert cli.main(["report", "--run-dir", str(indexed_run), "--kind", "bogus"]) == 1


class TestEvaluateVerb:
    def test_standalone_language_metrics(self, tmp_path, capsys):
        code = cli.main(["evaluate", "--out", str(tmp_path)])
        assert code == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["langid"]["accuracy"] >= 0.95
        written = json.loads((tmp_path / "evaluation.json").read_text(encoding="utf-8"))
        assert written == printed

    def test_run_dir_adds_translation_and_summary_scores(self, indexed_run, capsys):
        code = cli.main(["evaluate", "--run-dir", str(indexed_run)])
        assert code == 0
        printed = json.loads(capsys.readouterr().out)
        assert "summaries" in printed
        assert 0.0 < printed["summaries"]["mean_cosine"] <= 1.0
