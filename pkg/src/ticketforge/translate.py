"""Phrase-based statistical machine translation into English.

Training runs IBM-Model-1-style EM over lexical alignments, extracts
consistent phrase pairs up to three tokens, and scores them by relative
frequency in both directions.  Decoding is monotone beam search
maximizing translation-model plus bigram-language-model log score;
unmatched source tokens pass through verbatim as OOV.  Includes the
coverage / weighted-coverage evaluation and the OOV-driven tuning loop.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = [
    "PhraseTable",
    "TargetLanguageModel",
    "TranslationResult",
    "CoverageReport",
    "train",
    "model1_em",
    "translate",
    "coverage_report",
    "tune_with_oov",
    "save_phrase_table",
    "load_phrase_table",
    "save_language_model",
    "load_language_model",
]

MAX_PHRASE_LEN = 3
EM_ITERATIONS = 5
DEFAULT_BEAM_WIDTH = 16
LM_INTERPOLATION = 0.7
LM_ALPHA = 0.5
# Fixed translation-model cost charged when a source token passes through
# untranslated; keeps OOV emission comparable with real candidates.
OOV_LOG_PENALTY = math.log(1e-6)


@dataclass(frozen=True)
class PhraseCandidate:
    target: str
    p_src_given_tgt: float  # P(f|e), the decoder's translation factor
    p_tgt_given_src: float  # P(e|f)


@dataclass
class PhraseTable:
    source_language: str
    entries: dict[str, tuple[PhraseCandidate, ...]]

    def candidates(self, phrase: str) -> tuple[PhraseCandidate, ...]:
        return self.entries.get(phrase, ())


@dataclass
class TargetLanguageModel:
    vocabulary: tuple[str, ...]
    unigram_logp: dict[str, float]      # includes "" unseen slot
    bigram_counts: dict[str, dict[str, int]]
    context_totals: dict[str, int]
    interpolation: float = LM_INTERPOLATION

    def logp(self, word: str, prev: str | None) -> float:
        p_uni = math.exp(self.unigram_logp.get(word, self.unigram_logp[""]))
        lam = self.interpolation
        if prev is not None and prev in self.context_totals:
            c = self.bigram_counts.get(prev, {}).get(word, 0)
            p_ml = c / self.context_totals[prev]
            return math.log(lam * p_ml + (1.0 - lam) * p_uni)
        return math.log(p_uni)


@dataclass
class TranslationResult:
    target_tokens: list[str]
    origins: list[str]  # "translated" | "oov-passthrough"
    score: float

    def oov_tokens(self) -> list[str]:
        return [t for t, o in zip(self.target_tokens, self.origins) if o == "oov-passthrough"]

    def text(self) -> str:
        return " ".join(self.target_tokens)


@dataclass
class CoverageReport:
    ngram_frequencies: dict[tuple[str, ...], int]
    covered: set[tuple[str, ...]]
    coverage: float
    weighted_coverage: float
    oov_list: list[str]


def _tok(sentence: str) -> list[str]:
    return sentence.lower().split()


def model1_em(
    pairs: list[tuple[list[str], list[str]]], iterations: int = EM_ITERATIONS
) -> dict[str, dict[str, float]]:
    """IBM Model 1 EM: t[f][e] = P(source word f | target word e).

    Uniform initialization over co-occurring pairs; no NULL word.
    """
    t: dict[str, dict[str, float]] = {}
    cooc: dict[str, set[str]] = defaultdict(set)
    for src, tgt in pairs:
        for f in src:
            cooc[f].update(tgt)
    for f, es in cooc.items():
        p = 1.0 / len(es)
        t[f] = {e: p for e in sorted(es)}

    for _ in range(iterations):
        count: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        total: dict[str, float] = defaultdict(float)
        for src, tgt in pairs:
            for f in src:
                norm = sum(t[f][e] for e in tgt)
                if norm == 0.0:
                    continue
                for e in tgt:
                    frac = t[f][e] / norm
                    count[f][e] += frac
                    total[e] += frac
        for f in t:
            for e in t[f]:
                t[f][e] = count[f][e] / total[e] if total[e] > 0 else 0.0
    return t


def _align(src: list[str], tgt: list[str], t: dict[str, dict[str, float]]) -> list[int]:
    """Align each source token to its best target position (tie: leftmost)."""
    alignment = []
    for f in src:
        best_j, best_p = 0, -1.0
        for j, e in enumerate(tgt):
            p = t.get(f, {}).get(e, 0.0)
            if p > best_p:
                best_j, best_p = j, p
        alignment.append(best_j)
    return alignment


def _extract_phrases(
    src: list[str], tgt: list[str], alignment: list[int]
) -> list[tuple[str, str]]:
    """Consistent phrase pairs up to MAX_PHRASE_LEN tokens on either side."""
    pairs = []
    n = len(src)
    for i1 in range(n):
        for i2 in range(i1, min(i1 + MAX_PHRASE_LEN, n)):
            points = alignment[i1 : i2 + 1]
            j1, j2 = min(points), max(points)
            if j2 - j1 + 1 > MAX_PHRASE_LEN:
                continue
            # Consistency: no target word inside [j1,j2] aligned from outside.
            outside = [a for k, a in enumerate(alignment) if not i1 <= k <= i2]
            if any(j1 <= a <= j2 for a in outside):
                continue
            pairs.append((" ".join(src[i1 : i2 + 1]), " ".join(tgt[j1 : j2 + 1])))
    return pairs


def train(
    bilingual_corpus: list[tuple[str, str]],
    english_corpus: list[str] | None = None,
    source_language: str = "unknown",
) -> tuple[PhraseTable, TargetLanguageModel]:
    """Train the phrase table and the English bigram language model."""
    if not bilingual_corpus:
        raise ValueError("empty bilingual corpus")
    pairs = [(_tok(s), _tok(e)) for s, e in bilingual_corpus]
    t = model1_em(pairs)

    phrase_counts: Counter = Counter()
    src_totals: Counter = Counter()
    tgt_totals: Counter = Counter()
    for src, tgt in pairs:
        alignment = _align(src, tgt, t)
        for f_phrase, e_phrase in _extract_phrases(src, tgt, alignment):
            phrase_counts[(f_phrase, e_phrase)] += 1
            src_totals[f_phrase] += 1
            tgt_totals[e_phrase] += 1

    entries: dict[str, list[PhraseCandidate]] = defaultdict(list)
    for (f_phrase, e_phrase), c in phrase_counts.items():
        entries[f_phrase].append(
            PhraseCandidate(e_phrase, c / tgt_totals[e_phrase], c / src_totals[f_phrase])
        )
    table = PhraseTable(
        source_language,
        {
            f: tuple(sorted(cands, key=lambda c: (-c.p_src_given_tgt, c.target)))
            for f, cands in sorted(entries.items())
        },
    )

    english = [e for _, e in bilingual_corpus] + list(english_corpus or [])
    lm = _train_lm(english)
    return table, lm


def _train_lm(sentences: list[str]) -> TargetLanguageModel:
    unigrams: Counter = Counter()
    bigrams: dict[str, Counter] = defaultdict(Counter)
    for sent in sentences:
        toks = _tok(sent)
        unigrams.update(toks)
        for prev, word in zip(["<s>"] + toks, toks):
            bigrams[prev][word] += 1
    vocab = tuple(sorted(unigrams))
    total = sum(unigrams.values()) + LM_ALPHA * (len(vocab) + 1)
    unigram_logp = {w: math.log((unigrams[w] + LM_ALPHA) / total) for w in vocab}
    unigram_logp[""] = math.log(LM_ALPHA / total)
    return TargetLanguageModel(
        vocab,
        unigram_logp,
        {p: dict(c) for p, c in bigrams.items()},
        {p: sum(c.values()) for p, c in bigrams.items()},
    )


@dataclass(frozen=True)
class _Hypothesis:
    tokens: tuple[str, ...]
    origins: tuple[str, ...]
    score: float
    prev: str


def translate(
    sentence: str,
    table: PhraseTable,
    lm: TargetLanguageModel,
    beam_width: int = DEFAULT_BEAM_WIDTH,
) -> TranslationResult:
    """Monotone beam decoding maximizing log P(F|E) + log P(E).

    Source tokens with no phrase-table match starting at their position
    pass through verbatim, flagged ``oov-passthrough``.  Ties break by
    target-token-sequence lexicographic order.
    """
    src = _tok(sentence)
    if not src:
        return TranslationResult([], [], 0.0)

    beams: list[list[_Hypothesis]] = [[] for _ in range(len(src) + 1)]
    beams[0].append(_Hypothesis((), (), 0.0, "<s>"))

    for pos in range(len(src)):
        if not beams[pos]:
            continue
        expansions: dict[int, list[_Hypothesis]] = defaultdict(list)
        options: list[tuple[int, str, tuple[str, ...], float]] = []
        for k in range(1, MAX_PHRASE_LEN + 1):
            if pos + k > len(src):
                break
            phrase = " ".join(src[pos : pos + k])
            for cand in table.candidates(phrase):
                options.append((k, "translated", tuple(cand.target.split()), math.log(cand.p_src_given_tgt)))
        if not options:
            options.append((1, "oov-passthrough", (src[pos],), OOV_LOG_PENALTY))

        for hyp in beams[pos]:
            for k, origin, tgt_toks, tm_logp in options:
                score = hyp.score + tm_logp
                prev = hyp.prev
                for tok in tgt_toks:
                    score += lm.logp(tok, prev)
                    prev = tok
                expansions[pos + k].append(
                    _Hypothesis(
                        hyp.tokens + tgt_toks,
                        hyp.origins + (origin,) * len(tgt_toks),
                        score,
                        prev,
                    )
                )
        for nxt, hyps in expansions.items():
            beams[nxt].extend(hyps)
            beams[nxt].sort(key=lambda h: (-h.score, h.tokens))
            del beams[nxt][beam_width:]

    final = beams[len(src)]
    if not final:
        raise RuntimeError("decoder produced no complete hypothesis")
    best = min(final, key=lambda h: (-h.score, h.tokens))
    return TranslationResult(list(best.tokens), list(best.origins), best.score)


def coverage_report(
    translations: list[TranslationResult], top_fraction: float = 0.8
) -> CoverageReport:
    """Coverage of the most frequent OOV-free uni- and bi-grams.

    N-grams are ranked by frequency (ties lexicographic) and the smallest
    prefix whose cumulative frequency mass reaches ``top_fraction`` is
    retained.  An n-gram is covered iff none of its tokens was an OOV
    passthrough anywhere it occurred.
    """
    if not 0.0 < top_fraction <= 1.0:
        raise ValueError(f"top_fraction must be in (0,1], got {top_fraction}")
    if not translations:
        raise ValueError("empty translation set")

    freqs: Counter = Counter()
    tainted: set[tuple[str, ...]] = set()
    oov: list[str] = []
    for result in translations:
        toks = result.target_tokens
        flags = [o == "oov-passthrough" for o in result.origins]
        oov.extend(t for t, f in zip(toks, flags) if f)
        for n in (1, 2):
            for i in range(len(toks) - n + 1):
                gram = tuple(toks[i : i + n])
                freqs[gram] += 1
                if any(flags[i : i + n]):
                    tainted.add(gram)

    total_mass = sum(freqs.values())
    ranked = sorted(freqs, key=lambda g: (-freqs[g], g))
    selected: list[tuple[str, ...]] = []
    running = 0
    for gram in ranked:
        selected.append(gram)
        running += freqs[gram]
        if running / total_mass >= top_fraction:
            break

    covered = {g for g in selected if g not in tainted}
    sel_mass = sum(freqs[g] for g in selected)
    coverage = len(covered) / len(selected)
    weighted = sum(freqs[g] for g in covered) / sel_mass
    return CoverageReport(
        {g: freqs[g] for g in selected},
        covered,
        coverage,
        weighted,
        sorted(set(oov)),
    )


def tune_with_oov(
    table: PhraseTable, oov_list: list[str], lexicon: dict[str, str]
) -> PhraseTable:
    """Add lexicon translations for resolved OOV tokens with probability 1."""
    entries = dict(table.entries)
    for token in oov_list:
        key = token.lower()
        if key in entries:
            continue
        target = lexicon.get(token) or lexicon.get(key)
        if target is not None:
            entries[key] = (PhraseCandidate(target.lower(), 1.0, 1.0),)
    return PhraseTable(table.source_language, entries)


def save_phrase_table(table: PhraseTable, path: str | Path) -> None:
    lines = [f"# source_language\t{table.source_language}"]
    for src in sorted(table.entries):
        for cand in table.entries[src]:
            lines.append(
                f"{src}\t{cand.target}\t{cand.p_src_given_tgt:.12g}\t{cand.p_tgt_given_src:.12g}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_phrase_table(path: str | Path) -> PhraseTable:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    lang = "unknown"
    entries: dict[str, list[PhraseCandidate]] = defaultdict(list)
    for line in lines:
        if line.startswith("# source_language\t"):
            lang = line.split("\t")[1]
            continue
        if not line or line.startswith("#"):
            continue
        src, tgt, p_fe, p_ef = line.split("\t")
        entries[src].append(PhraseCandidate(tgt, float(p_fe), float(p_ef)))
    return PhraseTable(
        lang,
        {s: tuple(sorted(c, key=lambda x: (-x.p_src_given_tgt, x.target))) for s, c in entries.items()},
    )


def save_language_model(lm: TargetLanguageModel, path: str | Path) -> None:
    import json

    payload = {
        "schema_version": 1,
        "vocabulary": list(lm.vocabulary),
        "unigram_logp": lm.unigram_logp,
        "bigram_counts": lm.bigram_counts,
        "context_totals": lm.context_totals,
        "interpolation": lm.interpolation,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_language_model(path: str | Path) -> TargetLanguageModel:
    import json

    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return TargetLanguageModel(
        tuple(payload["vocabulary"]),
        payload["unigram_logp"],
        payload["bigram_counts"],
        payload["context_totals"],
        payload["interpolation"],
    )
