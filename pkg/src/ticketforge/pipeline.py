"""Pipeline orchestration: run the analysis stages in order, persist
per-stage artifacts, and serve or report on the results.

Stages are content-addressed: each stage's fingerprint chains the
upstream fingerprint with its own parameters, so an unchanged stage is
reloaded from its artifact instead of recomputed.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import translate as smt
from .cleansing import CleansingConfig, build_tdm, cleanse, keyword_candidates
from .corpus import (
    Ticket,
    TextInsights,
    corpus_stats,
    load_enriched,
    load_tickets,
    persist_enriched,
)
from .datagen import make_language_corpus
from .engine import IndexHolder, build_index
from .entities import extract_entities, extract_relations
from .langid import identify, load_models, save_models, train as train_langid
from .lexicons import load_bilingual_corpus, load_bilingual_lexicon, load_stopwords
from .predict import (
    assemble_features,
    build_agent_profiles,
    compute_mtbf,
    flag_ticket,
    mine_propagation_rules,
    save_sla_model,
    train_sla,
)
from .sentiment import analyze_document
from .summarize import build_ontology, summarize
from .topics import assign_and_label, fit_plsa, load_topic_model, save_topic_model

STAGES = (
    "ingest", "tcfe", "langid", "smt", "extract",
    "topics", "summarize", "sentiment", "predict", "index",
)

# detected language tag -> bundled bilingual corpus code
TRANSLATABLE = {"spanish": "es", "german": "de"}

_TOPIC_CLEANSE = CleansingConfig(stemming=True, domain_stopwords=True)


@dataclass
class PipelineConfig:
    input_path: str
    out_dir: str
    stages: tuple[str, ...] = STAGES
    seed: int = 0
    n_topics: int = 10
    topic_threshold: float = 0.25
    summary_window: int = 15
    summary_budget: int = 2
    beam_width: int = 16
    propagation_window_minutes: float = 240.0
    automatable_topics: tuple[str, ...] = ()

    def __post_init__(self):
        unknown = [s for s in self.stages if s not in STAGES]
        if unknown:
            raise ValueError(f"unknown stages: {unknown}")
        enabled = [s for s in STAGES if s in self.stages]
        # Later stages consume in-memory state from every earlier one.
        if enabled != list(STAGES[: len(enabled)]):
            raise ValueError("stages must form a prefix of the full stage order")
        self.stages = tuple(enabled)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stages"] = list(self.stages)
        d["automatable_topics"] = list(self.automatable_topics)
        return d

    @classmethod
    def from_mapping(cls, m: dict) -> "PipelineConfig":
        pipeline = m.get("pipeline", {})
        topics = m.get("topics", {})
        summary = m.get("summarize", {})
        smt_cfg = m.get("smt", {})
        predict = m.get("predict", {})
        report = m.get("report", {})
        return cls(
            input_path=pipeline["input"],
            out_dir=pipeline["out"],
            stages=tuple(pipeline.get("stages", STAGES)),
            seed=pipeline.get("seed", 0),
            n_topics=topics.get("n_topics", 10),
            topic_threshold=topics.get("threshold", 0.25),
            summary_window=summary.get("window", 15),
            summary_budget=summary.get("budget", 2),
            beam_width=smt_cfg.get("beam_width", 16),
            propagation_window_minutes=predict.get("propagation_window_minutes", 240.0),
            automatable_topics=tuple(report.get("automatable_topics", ())),
        )


@dataclass
class StageRecord:
    name: str
    fingerprint: str
    seconds: float
    records_in: int
    records_out: int
    skipped: bool
    artifacts: dict[str, str]  # relative path -> sha256


@dataclass
class RunManifest:
    config: dict
    stages: list[StageRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"schema_version": 1, "config": self.config,
                "stages": [asdict(s) for s in self.stages]}


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


class _Run:
    """Per-run state threaded through the stages."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out_dir)
        self.tickets: list[Ticket] = []
        self.rejection_count = 0
        self.language: dict[str, str] = {}
        self.translations: dict[str, dict] = {}   # tid -> {description, resolution, oov}
        self.entities: dict[str, list[dict]] = {}
        self.relations: dict[str, list[dict]] = {}
        self.description_topic: dict[str, str | None] = {}
        self.resolution_topic: dict[str, str | None] = {}
        self.topic_coverage = 0.0
        self.topics_payload: list[dict] = []
        self.summaries: dict[str, dict] = {}
        self.sentiments: dict[str, dict] = {}
        self.flags: dict[str, list[dict]] = {}
        self.rules_payload: list[dict] = []

    def analysis_text(self, t: Ticket) -> str:
        tr = self.translations.get(t.ticket_id)
        return tr["description"] if tr else t.description

    def analysis_resolution(self, t: Ticket) -> str | None:
        tr = self.translations.get(t.ticket_id)
        if tr and tr.get("resolution"):
            return tr["resolution"]
        return t.resolution

    def build_insights(self) -> list[TextInsights]:
        out = []
        for t in self.tickets:
            tid = t.ticket_id
            tr = self.translations.get(tid, {})
            summary = self.summaries.get(tid)
            senti = self.sentiments.get(tid)
            out.append(TextInsights.from_dict({
                "ticket_id": tid,
                "language": self.language.get(tid, "english"),
                "translated_description": tr.get("description"),
                "translated_resolution": tr.get("resolution"),
                "entities": self.entities.get(tid, []),
                "relations": self.relations.get(tid, []),
                "description_topic": self.description_topic.get(tid),
                "resolution_topic": self.resolution_topic.get(tid),
                "summary": summary,
                "sentiment": senti,
                "oov_tokens": tr.get("oov", []),
                "propagation_flags": self.flags.get(tid, []),
            }))
        return out


# ---------------------------------------------------------------------------
# Stage implementations.  Each returns (records_in, records_out, artifact
# relative paths); the loader rebuilds state from those artifacts.

def _stage_ingest(run: _Run) -> tuple[int, int, list[str]]:
    tickets, rejections = load_tickets(run.config.input_path)
    run.tickets = tickets
    run.rejection_count = len(rejections)
    lines = [json.dumps(t.to_dict(), sort_keys=True, ensure_ascii=False) for t in tickets]
    (run.out / "tickets.jsonl").write_text(
        "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
    )
    rej = [json.dumps({"line": r.line, "reason": r.reason}, sort_keys=True) for r in rejections]
    (run.out / "rejections.jsonl").write_text(
        "\n".join(rej) + ("\n" if rej else ""), encoding="utf-8"
    )
    return len(tickets) + len(rejections), len(tickets), ["tickets.jsonl", "rejections.jsonl"]


def _load_ingest(run: _Run) -> None:
    run.tickets, _ = load_tickets(run.out / "tickets.jsonl")
    rej_text = (run.out / "rejections.jsonl").read_text(encoding="utf-8")
    run.rejection_count = sum(1 for line in rej_text.splitlines() if line.strip())


def _stage_tcfe(run: _Run) -> tuple[int, int, list[str]]:
    payload = {}
    for t in run.tickets:
        stream = cleanse(t.description)
        payload[t.ticket_id] = {
            "tokens": stream.normalized(),
            "keywords": keyword_candidates(t.description),
        }
    _write_json(run.out / "tcfe.json", payload)
    return len(run.tickets), len(payload), ["tcfe.json"]


def _load_tcfe(run: _Run) -> None:
    pass  # downstream stages re-derive token streams from their own inputs


def _stage_langid(run: _Run) -> tuple[int, int, list[str]]:
    train_set, _ = make_language_corpus()
    models = train_langid(train_set)
    save_models(models, run.out / "models" / "langid.json")
    run.language = {
        t.ticket_id: identify(t.description, models)[0] for t in run.tickets
    }
    _write_json(run.out / "languages.json", run.language)
    return len(run.tickets), len(run.language), ["models/langid.json", "languages.json"]


def _load_langid(run: _Run) -> None:
    run.language = _read_json(run.out / "languages.json")


def _stage_smt(run: _Run) -> tuple[int, int, list[str]]:
    artifacts = []
    needed = {
        lang for lang in set(run.language.values()) if lang in TRANSLATABLE
    }
    systems = {}
    for lang in sorted(needed):
        code = TRANSLATABLE[lang]
        table, lm = smt.train(load_bilingual_corpus(code), source_language=lang)
        table = smt.tune_with_oov(
            table,
            sorted({w for s, _ in load_bilingual_corpus(code) for w in s.lower().split()}),
            load_bilingual_lexicon(code),
        )
        smt.save_phrase_table(table, run.out / "models" / f"phrase_{code}.tsv")
        smt.save_language_model(lm, run.out / "models" / f"lm_{code}.json")
        artifacts += [f"models/phrase_{code}.tsv", f"models/lm_{code}.json"]
        systems[lang] = (table, lm)

    run.translations = {}
    for t in run.tickets:
        lang = run.language.get(t.ticket_id, "english")
        if lang not in systems:
            continue
        table, lm = systems[lang]
        desc = smt.translate(t.description, table, lm, run.config.beam_width)
        entry = {"description": desc.text(), "oov": desc.oov_tokens()}
        if t.resolution:
            res = smt.translate(t.resolution, table, lm, run.config.beam_width)
            entry["resolution"] = res.text()
            entry["oov"] = sorted(set(entry["oov"]) | set(res.oov_tokens()))
        run.translations[t.ticket_id] = entry
    _write_json(run.out / "translations.json", run.translations)
    return len(run.tickets), len(run.translations), artifacts + ["translations.json"]


def _load_smt(run: _Run) -> None:
    run.translations = _read_json(run.out / "translations.json")


def _stage_extract(run: _Run) -> tuple[int, int, list[str]]:
    for t in run.tickets:
        text = run.analysis_text(t)
        ents = extract_entities(text)
        rels = extract_relations(text, ents)
        run.entities[t.ticket_id] = [asdict(e) for e in ents]
        run.relations[t.ticket_id] = [asdict(r) for r in rels]
    _write_json(run.out / "extract.json",
                {"entities": run.entities, "relations": run.relations})
    return len(run.tickets), len(run.entities), ["extract.json"]


def _load_extract(run: _Run) -> None:
    payload = _read_json(run.out / "extract.json")
    run.entities = payload["entities"]
    run.relations = payload["relations"]


def _topic_tdm(run: _Run):
    from .cleansing import TokenStream

    stopwords = load_stopwords()
    streams = []
    for t in run.tickets:
        stream = cleanse(run.analysis_text(t), _TOPIC_CLEANSE, stopwords)
        # bare numbers (octets, floor numbers) make poor topic terms
        streams.append(
            TokenStream(tuple(tok for tok in stream.tokens if not tok.normalized.isdigit()))
        )
    return build_tdm(streams, [t.ticket_id for t in run.tickets])


def _fold_in(model, tokens: list[str]) -> tuple[str | None, float]:
    """Posterior over topics for an unseen token bag; None if no overlap."""
    import numpy as np

    term_index = {term: i for i, term in enumerate(model.terms)}
    log_post = np.log(model.topic_priors)
    seen = 0
    for tok in tokens:
        i = term_index.get(tok)
        if i is None:
            continue
        seen += 1
        with_floor = np.maximum(model.word_given_topic[i], 1e-300)
        log_post = log_post + np.log(with_floor)
    if seen == 0:
        return None, 0.0
    post = np.exp(log_post - log_post.max())
    post /= post.sum()
    k = int(np.argmax(post))
    return model.topic_label(k), float(post[k])


def _stage_topics(run: _Run) -> tuple[int, int, list[str]]:
    tdm = _topic_tdm(run)
    k = min(run.config.n_topics, len(tdm.doc_ids))
    model = fit_plsa(tdm, k, seed=run.config.seed)
    save_topic_model(model, run.out / "models" / "topics.json")
    report = assign_and_label(model, tdm, run.config.topic_threshold)
    run.description_topic = dict(report.assignments)
    run.topic_coverage = report.coverage

    stopwords = load_stopwords()
    run.resolution_topic = {}
    for t in run.tickets:
        res = run.analysis_resolution(t)
        if not res:
            run.resolution_topic[t.ticket_id] = None
            continue
        tokens = cleanse(res, _TOPIC_CLEANSE, stopwords).normalized()
        label, post = _fold_in(model, tokens)
        run.resolution_topic[t.ticket_id] = (
            label if label is not None and post >= run.config.topic_threshold else None
        )

    counts: dict[str, int] = {}
    for label in run.description_topic.values():
        if label is not None:
            counts[label] = counts.get(label, 0) + 1
    run.topics_payload = [
        {"label": lbl, "tickets": n, "terms": lbl.split()}
        for lbl, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    _write_json(run.out / "topics.json", {
        "coverage": report.coverage,
        "weighted_coverage": report.weighted_coverage,
        "topics": run.topics_payload,
        "description_topic": run.description_topic,
        "resolution_topic": run.resolution_topic,
    })
    return len(run.tickets), len(run.description_topic), ["models/topics.json", "topics.json"]


def _load_topics(run: _Run) -> None:
    payload = _read_json(run.out / "topics.json")
    run.description_topic = payload["description_topic"]
    run.resolution_topic = payload["resolution_topic"]
    run.topic_coverage = payload["coverage"]
    run.topics_payload = payload["topics"]


def _stage_summarize(run: _Run) -> tuple[int, int, list[str]]:
    tdm = _topic_tdm(run)
    ontology = build_ontology(tdm)
    for t in run.tickets:
        result = summarize(
            run.analysis_text(t), ontology,
            run.config.summary_window, run.config.summary_budget,
        )
        run.summaries[t.ticket_id] = asdict(result)
    _write_json(run.out / "summaries.json", run.summaries)
    return len(run.tickets), len(run.summaries), ["summaries.json"]


def _load_summarize(run: _Run) -> None:
    run.summaries = _read_json(run.out / "summaries.json")


def _stage_sentiment(run: _Run) -> tuple[int, int, list[str]]:
    for t in run.tickets:
        text = t.csat_comment or run.analysis_text(t)
        label, _ = analyze_document(text)
        run.sentiments[t.ticket_id] = asdict(label)
    _write_json(run.out / "sentiments.json", run.sentiments)
    return len(run.tickets), len(run.sentiments), ["sentiments.json"]


def _load_sentiment(run: _Run) -> None:
    run.sentiments = _read_json(run.out / "sentiments.json")


def _stage_predict(run: _Run) -> tuple[int, int, list[str]]:
    insights = {i.ticket_id: i for i in run.build_insights()}
    artifacts = []

    vectors, dictionary = assemble_features(run.tickets, insights)
    labeled = [v for v in vectors if v.label is not None]
    classes = {v.label for v in labeled}
    if len(classes) == 2:
        model = train_sla(vectors, dictionary, seed=run.config.seed)
        save_sla_model(model, run.out / "models" / "sla.json")
        artifacts.append("models/sla.json")

    profiles = build_agent_profiles(run.tickets, insights)
    _write_json(run.out / "agents.json", {
        a: {"per_topic": {k: list(v) for k, v in p.per_topic.items()},
            "shrunken_means": p.shrunken_means}
        for a, p in sorted(profiles.items())
    })

    mtbf = compute_mtbf([t for t in run.tickets if t.device_id])
    _write_json(run.out / "mtbf.json", [
        {"group": list(r.group_key), "failures": r.failure_count,
         "mtbf_minutes": r.mtbf_minutes, "mttr_minutes": r.mttr_minutes,
         "availability": r.availability}
        for r in mtbf
    ])

    rules = mine_propagation_rules(
        run.tickets, insights, run.config.propagation_window_minutes
    )
    run.rules_payload = [asdict(r) for r in rules]
    _write_json(run.out / "rules.json", run.rules_payload)

    run.flags = {}
    for t in run.tickets:
        hits = flag_ticket(rules, run.description_topic.get(t.ticket_id))
        if hits:
            run.flags[t.ticket_id] = [asdict(r) for r in hits]
    _write_json(run.out / "flags.json", run.flags)
    return len(run.tickets), len(run.tickets), artifacts + [
        "agents.json", "mtbf.json", "rules.json", "flags.json",
    ]


def _load_predict(run: _Run) -> None:
    run.rules_payload = _read_json(run.out / "rules.json")
    run.flags = _read_json(run.out / "flags.json")


def _stage_index(run: _Run) -> tuple[int, int, list[str]]:
    insights = run.build_insights()
    persist_enriched(run.tickets, insights, run.out / "enriched")
    build_index(run.tickets, {i.ticket_id: i for i in insights})  # validates joins
    return len(run.tickets), len(insights), [
        "enriched/tickets.jsonl", "enriched/insights.jsonl", "enriched/manifest.json",
    ]


def _load_index(run: _Run) -> None:
    pass


_STAGE_FUNCS = {
    "ingest": (_stage_ingest, _load_ingest),
    "tcfe": (_stage_tcfe, _load_tcfe),
    "langid": (_stage_langid, _load_langid),
    "smt": (_stage_smt, _load_smt),
    "extract": (_stage_extract, _load_extract),
    "topics": (_stage_topics, _load_topics),
    "summarize": (_stage_summarize, _load_summarize),
    "sentiment": (_stage_sentiment, _load_sentiment),
    "predict": (_stage_predict, _load_predict),
    "index": (_stage_index, _load_index),
}


def _stage_params(config: PipelineConfig, name: str) -> dict:
    if name == "smt":
        return {"beam_width": config.beam_width}
    if name == "topics":
        return {"n_topics": config.n_topics, "seed": config.seed,
                "threshold": config.topic_threshold}
    if name == "summarize":
        return {"window": config.summary_window, "budget": config.summary_budget}
    if name == "predict":
        return {"seed": config.seed,
                "propagation_window_minutes": config.propagation_window_minutes}
    return {}


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Execute the enabled stage prefix, reusing artifacts whose
    fingerprint matches the previous run."""
    out = Path(config.out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)
    run = _Run(config)

    previous: dict[str, dict] = {}
    manifest_path = out / "run_manifest.json"
    if manifest_path.exists():
        try:
            old = json.loads(manifest_path.read_text(encoding="utf-8"))
            previous = {s["name"]: s for s in old.get("stages", [])}
        except (json.JSONDecodeError, KeyError):
            previous = {}

    manifest = RunManifest(config.to_dict())
    fingerprint = _sha256(
        Path(config.input_path).read_bytes() + str(config.seed).encode()
    )
    try:
        for name in config.stages:
            params = _stage_params(config, name)
            fingerprint = _sha256(
                (fingerprint + name + json.dumps(params, sort_keys=True)).encode()
            )
            compute, load = _STAGE_FUNCS[name]
            old = previous.get(name)
            reusable = (
                old is not None
                and old.get("fingerprint") == fingerprint
                and all(
                    (out / rel).exists() and _sha256((out / rel).read_bytes()) == digest
                    for rel, digest in old.get("artifacts", {}).items()
                )
            )
            started = time.perf_counter()
            if reusable:
                load(run)
                record = StageRecord(
                    name, fingerprint, time.perf_counter() - started,
                    old["records_in"], old["records_out"], True, old["artifacts"],
                )
            else:
                n_in, n_out, artifacts = compute(run)
                hashes = {rel: _sha256((out / rel).read_bytes()) for rel in artifacts}
                record = StageRecord(
                    name, fingerprint, time.perf_counter() - started,
                    n_in, n_out, False, hashes,
                )
            manifest.stages.append(record)
    finally:
        # Manifest-so-far survives a stage failure for post-mortems.
        manifest_path.write_text(
            json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    return manifest


# ---------------------------------------------------------------------------
# Reports

REPORT_KINDS = ("volume", "topics", "sla", "propagation", "csat")


def report(run_dir: str | Path, kind: str, automatable: tuple[str, ...] = ()) -> Path:
    """Write report_<kind>.txt under the run directory and return its path."""
    base = Path(run_dir)
    if kind not in REPORT_KINDS:
        raise ValueError(f"unknown report kind {kind!r}")
    lines = [f"{kind} report", "=" * (len(kind) + 7)]

    if kind == "volume":
        tickets, _ = load_enriched(base / "enriched")
        stats = corpus_stats(tickets)
        topics = _read_json(base / "topics.json")["topics"]
        total = stats.ticket_count
        lines.append(f"tickets: {total}")
        for t, n in sorted(stats.per_type.items()):
            lines.append(f"  type {t}: {n}")
        lines.append("top topics:")
        for entry in topics[:10]:
            lines.append(f"  {entry['label']}: {entry['tickets']}")
        automatable_count = sum(
            e["tickets"] for e in topics if e["label"] in automatable
        )
        opportunity = automatable_count / total if total else 0.0
        lines.append(f"reduction opportunity: {opportunity:.2%} "
                     f"({automatable_count} tickets in automatable topics)")
    elif kind == "topics":
        payload = _read_json(base / "topics.json")
        lines.append(f"coverage: {payload['coverage']:.4f}")
        lines.append(f"weighted coverage: {payload['weighted_coverage']:.4f}")
        for entry in payload["topics"]:
            lines.append(f"  {entry['label']}: {entry['tickets']}")
    elif kind == "sla":
        model = _read_json(base / "models" / "sla.json")
        lines.append(f"final loss: {model['final_loss']:.6f}")
        lines.append(f"epochs: {model['epochs']}")
        lines.append(f"features: {len(model['weights'])}")
    elif kind == "propagation":
        rules = _read_json(base / "rules.json")
        lines.append(f"rules: {len(rules)}")
        for r in rules:
            lines.append(
                f"  {r['antecedent']} -> {r['consequent']}"
                f" support={r['support']:.4f} confidence={r['confidence']:.4f}"
                f" lift={r['lift']:.4f} group={r['recommended_group']}"
            )
    elif kind == "csat":
        tickets, insights = load_enriched(base / "enriched")
        by_id = {i.ticket_id: i for i in insights}
        scored = [t for t in tickets if t.csat_score is not None]
        lines.append(f"csat records: {len(scored)}")
        if scored:
            mean = sum(t.csat_score for t in scored) / len(scored)
            lines.append(f"mean score: {mean:.3f}")
            dist: dict[str, int] = {}
            for t in scored:
                ins = by_id.get(t.ticket_id)
                label = ins.sentiment.label if ins and ins.sentiment else "neutral"
                dist[label] = dist.get(label, 0) + 1
            for label, n in sorted(dist.items()):
                lines.append(f"  sentiment {label}: {n}")

    path = base / f"report_{kind}.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_run(run_dir: str | Path) -> tuple[IndexHolder, list[dict], list[dict]]:
    """Rebuild the search index and API payloads from pipeline artifacts."""
    base = Path(run_dir)
    tickets, insights = load_enriched(base / "enriched")
    index = build_index(tickets, {i.ticket_id: i for i in insights})
    topics_payload = _read_json(base / "topics.json")["topics"]
    rules_payload = _read_json(base / "rules.json")
    return IndexHolder(index), topics_payload, rules_payload


def serve(run_dir: str | Path, host: str = "127.0.0.1", port: int = 8123) -> None:
    import uvicorn

    from .api import create_app

    holder, topics_payload, rules_payload = load_run(run_dir)
    app = create_app(holder, topics_payload, rules_payload)
    uvicorn.run(app, host=host, port=port, log_level="info")
