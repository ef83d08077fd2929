"""Command line entry point.

Verbs: ingest, analyze, train, index, serve, report, evaluate.
Exit codes: 0 ok, 1 user error, 2 internal error.  A TOML config file
(--config or the TICKETFORGE_CONFIG env var) supplies defaults; flags
override config values.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .corpus import TicketError
from .pipeline import (
    REPORT_KINDS,
    STAGES,
    PipelineConfig,
    report,
    run_pipeline,
    serve,
)

# Verb -> how much of the stage order it runs.
_VERB_STAGES = {
    "ingest": STAGES[:1],
    "analyze": STAGES[: STAGES.index("sentiment") + 1],
    "train": STAGES[: STAGES.index("predict") + 1],
    "index": STAGES,
}


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get("TICKETFORGE_CONFIG")
    if not path:
        return {}
    with open(path, "rb") as f:
        return tomllib.load(f)


def _pipeline_config(args, stages) -> PipelineConfig:
    raw = _load_config(args.config)
    raw.setdefault("pipeline", {})
    if args.input:
        raw["pipeline"]["input"] = args.input
    if args.out:
        raw["pipeline"]["out"] = args.out
    if args.seed is not None:
        raw["pipeline"]["seed"] = args.seed
    if args.topics is not None:
        raw.setdefault("topics", {})["n_topics"] = args.topics
    if "input" not in raw["pipeline"] or "out" not in raw["pipeline"]:
        raise ValueError("--input and --out are required (flag or config)")
    raw["pipeline"]["stages"] = list(stages)
    return PipelineConfig.from_mapping(raw)


def _cmd_pipeline(args) -> int:
    config = _pipeline_config(args, _VERB_STAGES[args.verb])
    manifest = run_pipeline(config)
    for record in manifest.stages:
        flag = "skipped" if record.skipped else f"{record.seconds:.2f}s"
        print(f"{record.name:10s} in={record.records_in} out={record.records_out} [{flag}]")
    return 0


def _cmd_serve(args) -> int:
    serve(args.run_dir, args.host, args.port)
    return 0


def _cmd_report(args) -> int:
    raw = _load_config(args.config)
    automatable = tuple(raw.get("report", {}).get("automatable_topics", ()))
    if args.automatable:
        automatable = tuple(args.automatable)
    path = report(args.run_dir, args.kind, automatable)
    print(path.read_text(encoding="utf-8"), end="")
    return 0


def _cmd_evaluate(args) -> int:
    """Held-out language ID metrics plus, when a run directory is given,
    translation coverage and summary cosine figures."""
    from . import langid, summarize, translate
    from .datagen import make_language_corpus

    started = time.perf_counter()
    train_set, test_set = make_language_corpus()
    models = langid.train(train_set)
    rows = langid.evaluate(models, test_set)
    total = sum(r.documents for r in rows)
    errors = sum(r.level1_errors + r.level2_errors for r in rows)
    payload: dict = {
        "langid": {
            "documents": total,
            "accuracy": (total - errors) / total,
            "per_language": [
                {"language": r.language, "documents": r.documents,
                 "level1_errors": r.level1_errors, "level2_errors": r.level2_errors}
                for r in rows
            ],
            "seconds": time.perf_counter() - started,
        }
    }
    if args.run_dir:
        base = Path(args.run_dir)
        translations = json.loads((base / "translations.json").read_text(encoding="utf-8"))
        if translations:
            results = [
                translate.TranslationResult(
                    entry["description"].split(),
                    ["oov-passthrough" if tok in set(entry["oov"]) else "translated"
                     for tok in entry["description"].split()],
                    0.0,
                )
                for entry in translations.values()
            ]
            cov = translate.coverage_report(results)
            payload["smt"] = {
                "coverage": cov.coverage,
                "weighted_coverage": cov.weighted_coverage,
                "oov_types": len(cov.oov_list),
            }
        summaries = json.loads((base / "summaries.json").read_text(encoding="utf-8"))
        tickets_text = {}
        with open(base / "tickets.jsonl", encoding="utf-8") as f:
            for line in f:
                record = json.loads(line)
                tickets_text[record["ticket_id"]] = record["description"]
        sims = [
            summarize.cosine_similarity(" ".join(s["sentences"]), tickets_text[tid])
            for tid, s in summaries.items()
            if tid in tickets_text
        ]
        if sims:
            payload["summaries"] = {
                "mean_cosine": sum(sims) / len(sims),
                "documents": len(sims),
            }
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "evaluation.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ticketforge")
    parser.add_argument("--config", help="TOML config file")
    sub = parser.add_subparsers(dest="verb", required=True)

    for verb in ("ingest", "analyze", "train", "index"):
        p = sub.add_parser(verb)
        p.add_argument("--input", help="ticket JSONL file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--topics", type=int, default=None, help="pLSA topic count")
        p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("serve")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8123)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("report")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--kind", required=True, choices=REPORT_KINDS)
    p.add_argument("--automatable", nargs="*", help="topic labels counted as automatable")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("evaluate")
    p.add_argument("--run-dir", help="pipeline output directory to score")
    p.add_argument("--out", help="directory for evaluation.json")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (TicketError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
