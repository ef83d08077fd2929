"""Ontology-driven extractive summarization.

Builds a concept ontology from the most frequent noun/verb terms of a
term-document matrix, scores moving token windows by concept-weight
density, extracts the densest sentences, and evaluates produced
summaries against references with cosine similarity.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .cleansing import TermDocumentMatrix, pos_tag, split_sentences, stem
from .entities import extract_entities, extract_relations
from .lexicons import data_path, load_category_lexicon

__all__ = [
    "OntologyConcept",
    "Ontology",
    "SummaryResult",
    "DEFAULT_CATEGORY_WEIGHTS",
    "DEFAULT_WINDOW_SIZES",
    "build_ontology",
    "score_windows",
    "summarize",
    "evaluate_cosine",
    "cosine_similarity",
]

CATEGORIES = ("action", "condition", "entity", "incident", "negation", "quantity", "sentiment")

DEFAULT_CATEGORY_WEIGHTS = {
    "incident": 3.0,
    "action": 2.5,
    "negation": 2.0,
    "condition": 1.5,
    "entity": 1.0,
    "quantity": 1.0,
    "sentiment": 1.0,
}

DEFAULT_WINDOW_SIZES = (2, 5, 10, 15)


@dataclass(frozen=True)
class OntologyConcept:
    term: str
    category: str
    weight: float
    pos_type: str
    phrase_type: str


@dataclass
class Ontology:
    concepts: dict[str, OntologyConcept]
    corpus_fingerprint: str = ""

    def lookup(self, token: str) -> OntologyConcept | None:
        tok = token.lower()
        concept = self.concepts.get(tok)
        if concept is None:
            concept = self.concepts.get(stem(tok))
        return concept


@dataclass
class SummaryResult:
    sentences: list[str]
    matched_concepts: dict[str, float]
    np_keywords: list[str]
    np_vp_keywords: list[str]
    window_densities: list[float] = field(default_factory=list)


_CATEGORY_LEX: dict[str, str] = {}


def _category_lexicon() -> dict[str, str]:
    if not _CATEGORY_LEX:
        _CATEGORY_LEX.update(load_category_lexicon(data_path("ontology_categories.txt")))
    return _CATEGORY_LEX


def build_ontology(
    tdm: TermDocumentMatrix,
    cumulative_mass: float = 0.8,
    category_weights: dict[str, float] | None = None,
    category_lexicon: dict[str, str] | None = None,
) -> Ontology:
    """Select noun/verb terms covering ``cumulative_mass`` of their frequency.

    Terms are ranked by corpus frequency (ties alphabetical) and the
    smallest prefix whose cumulative frequency reaches the mass cutoff is
    kept.  Categories come from the category lexicon, defaulting to
    ``entity``.
    """
    if not 0.0 < cumulative_mass <= 1.0:
        raise ValueError(f"cumulative_mass must be in (0,1], got {cumulative_mass}")
    if not tdm.terms:
        raise ValueError("empty term-document matrix")
    weights = category_weights or DEFAULT_CATEGORY_WEIGHTS
    cat_lex = category_lexicon if category_lexicon is not None else _category_lexicon()

    tagged = {t: tag for t, tag in zip(tdm.terms, pos_tag(list(tdm.terms)))}
    nv_terms = [t for t in tdm.terms if tagged[t] in ("noun", "verb")]
    if not nv_terms:
        raise ValueError("no noun or verb terms in matrix")
    freqs = {t: tdm.term_frequency(t) for t in nv_terms}
    total = sum(freqs.values())
    ranked = sorted(nv_terms, key=lambda t: (-freqs[t], t))

    concepts: dict[str, OntologyConcept] = {}
    running = 0
    for term in ranked:
        running += freqs[term]
        category = cat_lex.get(term, "entity")
        pos_type = tagged[term]
        phrase_type = "NP" if pos_type == "noun" else "VP"
        concepts[term] = OntologyConcept(term, category, weights.get(category, 1.0), pos_type, phrase_type)
        if running / total >= cumulative_mass:
            break
    fingerprint = f"{len(tdm.doc_ids)}:{len(tdm.terms)}:{tdm.total_count()}"
    return Ontology(concepts, fingerprint)


def _tokens(text: str) -> list[str]:
    return [m.group(0).lower() for m in re.finditer(r"\w+", text)]


def score_windows(
    text: str, ontology: Ontology, window_sizes: tuple[int, ...] = DEFAULT_WINDOW_SIZES
) -> dict[int, list[float]]:
    """Density trace per window size: sum of matched weights / window size.

    Stride is 1; text shorter than a window yields a single truncated
    window (still normalized by the nominal size).
    """
    toks = _tokens(text)
    weights = [c.weight if (c := ontology.lookup(t)) else 0.0 for t in toks]
    traces: dict[int, list[float]] = {}
    for n in sorted(window_sizes):
        if not toks:
            traces[n] = []
            continue
        if len(toks) <= n:
            traces[n] = [sum(weights) / n]
            continue
        traces[n] = [sum(weights[i : i + n]) / n for i in range(len(toks) - n + 1)]
    return traces


def summarize(
    text: str,
    ontology: Ontology,
    window_size: int = 15,
    sentence_budget: int = 2,
) -> SummaryResult:
    """Extract the ``sentence_budget`` densest sentences, in source order.

    A sentence scores the maximum density over windows overlapping it;
    ties go to the earlier sentence.
    """
    if sentence_budget < 1:
        raise ValueError("sentence_budget must be >= 1")
    sentences = split_sentences(text)
    if not sentences:
        raise ValueError("empty text")

    toks = _tokens(text)
    densities = score_windows(text, ontology, (window_size,))[window_size]

    # Token index range of each sentence, in document token order.
    ranges: list[tuple[int, int]] = []
    cursor = 0
    for sent in sentences:
        n = len(_tokens(sent))
        ranges.append((cursor, cursor + n))
        cursor += n

    def sentence_score(rng: tuple[int, int]) -> float:
        s, e = rng
        best = 0.0
        for w, d in enumerate(densities):
            w_end = min(w + window_size, len(toks))
            if w < e and s < w_end:
                best = max(best, d)
        return best

    scores = [sentence_score(r) for r in ranges]
    order = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
    keep = sorted(order[:sentence_budget])
    picked = [sentences[i] for i in keep]

    matched: dict[str, float] = {}
    np_keywords: list[str] = []
    np_vp_keywords: list[str] = []
    for sent in picked:
        for tok in _tokens(sent):
            concept = ontology.lookup(tok)
            if concept is None:
                continue
            matched.setdefault(concept.term, concept.weight)
            if concept.pos_type == "noun" and concept.term not in np_keywords:
                np_keywords.append(concept.term)
            if concept.term not in np_vp_keywords:
                np_vp_keywords.append(concept.term)
    summary_text = " ".join(picked)
    for rel in extract_relations(summary_text, extract_entities(summary_text)):
        if rel.action not in np_vp_keywords:
            np_vp_keywords.append(rel.action)
    return SummaryResult(picked, matched, np_keywords, np_vp_keywords, densities)


def cosine_similarity(text_a: str, text_b: str) -> float:
    """Cosine over raw term-frequency vectors of the two texts."""
    va, vb = Counter(_tokens(text_a)), Counter(_tokens(text_b))
    dot = sum(va[t] * vb[t] for t in va.keys() & vb.keys())
    norm = math.sqrt(sum(c * c for c in va.values())) * math.sqrt(sum(c * c for c in vb.values()))
    return dot / norm if norm else 0.0


def evaluate_cosine(
    produced: dict[int, dict[str, str]],
    references: dict[str, str],
    quantiles: tuple[float, ...] = (0.25, 0.5, 0.75),
) -> dict[int, dict[float, float]]:
    """Similarity quantiles per window size against reference summaries."""
    import numpy as np

    report: dict[int, dict[float, float]] = {}
    for size, by_ticket in sorted(produced.items()):
        sims = []
        for ticket_id, summary in sorted(by_ticket.items()):
            if ticket_id not in references:
                raise KeyError(f"missing reference summary for ticket {ticket_id}")
            sims.append(cosine_similarity(summary, references[ticket_id]))
        report[size] = {q: float(np.quantile(sims, q)) for q in quantiles}
    return report
