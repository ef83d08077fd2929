"""Two-level statistical language identification.

Level 1 separates CJK scripts from Latin-script text with character
n-gram naive Bayes; level 2 picks the specific Latin-script language with
word-unigram naive Bayes.  A Unicode-block shortcut may short-circuit
unambiguous pure-CJK inputs only.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "LanguageProfile",
    "LanguageModelSet",
    "UnknownLanguageError",
    "EUROPEAN_LANGUAGES",
    "SCRIPT_GROUPS",
    "train",
    "identify",
    "evaluate",
    "save_models",
    "load_models",
]

SMOOTHING_ALPHA = 0.5

EUROPEAN_LANGUAGES = (
    "danish", "english", "french", "german", "italian", "portuguese", "spanish", "swedish",
)
SCRIPT_GROUPS = ("chinese", "european", "japanese", "korean")

_GROUP_OF = {lang: "european" for lang in EUROPEAN_LANGUAGES}
_GROUP_OF.update({"japanese": "japanese", "korean": "korean", "chinese": "chinese"})


class UnknownLanguageError(ValueError):
    """Raised when the input has no identifiable content."""


@dataclass
class LanguageProfile:
    tag: str
    char_unigram: dict[str, float]   # log-probabilities, "" key = unseen
    char_bigram: dict[str, float]
    word_unigram: dict[str, float]
    training_tokens: int = 0


@dataclass
class LanguageModelSet:
    level1: dict[str, LanguageProfile]       # script group -> char profiles
    level2: dict[str, LanguageProfile]       # language -> word profiles
    level1_priors: dict[str, float]
    level2_priors: dict[str, float]


def _word_tokens(text: str) -> list[str]:
    return [m.group(0).lower() for m in re.finditer(r"[^\W\d_]+", text, re.UNICODE)]


def _char_features(text: str) -> tuple[list[str], list[str]]:
    chars = [c for c in text.lower() if not c.isspace()]
    bigrams = ["".join(p) for p in zip(chars, chars[1:])]
    return chars, bigrams


def _log_table(counts: Counter, alpha: float) -> dict[str, float]:
    """Additively smoothed log-probabilities with an unseen slot under ""."""
    vocab = sorted(counts)
    total = sum(counts.values()) + alpha * (len(vocab) + 1)
    table = {v: math.log((counts[v] + alpha) / total) for v in vocab}
    table[""] = math.log(alpha / total)
    return table


def train(labeled_corpus: list[tuple[str, str]]) -> LanguageModelSet:
    """Estimate both levels from (text, language tag) pairs."""
    langs = {lang for _, lang in labeled_corpus}
    missing = [l for l in langs if l not in _GROUP_OF]
    if missing:
        raise ValueError(f"unsupported language tags: {missing}")

    group_chars: dict[str, Counter] = {}
    group_bigrams: dict[str, Counter] = {}
    group_docs: Counter = Counter()
    lang_words: dict[str, Counter] = {}
    lang_docs: Counter = Counter()

    for text, lang in labeled_corpus:
        group = _GROUP_OF[lang]
        chars, bigrams = _char_features(text)
        group_chars.setdefault(group, Counter()).update(chars)
        group_bigrams.setdefault(group, Counter()).update(bigrams)
        group_docs[group] += 1
        if group == "european":
            words = _word_tokens(text)
            lang_words.setdefault(lang, Counter()).update(words)
            lang_docs[lang] += 1

    level1 = {
        g: LanguageProfile(
            g,
            _log_table(group_chars[g], SMOOTHING_ALPHA),
            _log_table(group_bigrams[g], SMOOTHING_ALPHA),
            {},
            sum(group_chars[g].values()),
        )
        for g in sorted(group_chars)
    }
    level2 = {
        lang: LanguageProfile(
            lang, {}, {}, _log_table(lang_words[lang], SMOOTHING_ALPHA),
            sum(lang_words[lang].values()),
        )
        for lang in sorted(lang_words)
    }
    n1 = sum(group_docs.values())
    n2 = sum(lang_docs.values())
    level1_priors = {g: group_docs[g] / n1 for g in sorted(group_docs)}
    level2_priors = {l: lang_docs[l] / n2 for l in sorted(lang_docs)} if n2 else {}
    return LanguageModelSet(level1, level2, level1_priors, level2_priors)


_HANGUL = (0xAC00, 0xD7A3)
_KANA = ((0x3040, 0x309F), (0x30A0, 0x30FF))
_HAN = (0x4E00, 0x9FFF)


def _script_shortcut(text: str) -> str | None:
    """Classify only unambiguous pure-CJK inputs; None otherwise."""
    hangul = kana = han = other = 0
    for ch in text:
        if ch.isspace() or not ch.isalpha():
            continue
        cp = ord(ch)
        if _HANGUL[0] <= cp <= _HANGUL[1]:
            hangul += 1
        elif any(lo <= cp <= hi for lo, hi in _KANA):
            kana += 1
        elif _HAN[0] <= cp <= _HAN[1]:
            han += 1
        else:
            other += 1
    if other:
        return None
    if hangul and not kana and not han:
        return "korean"
    if kana and not hangul:
        return "japanese"
    if han and not hangul and not kana:
        return "chinese"
    return None


def _score_level1(text: str, models: LanguageModelSet) -> dict[str, float]:
    chars, bigrams = _char_features(text)
    scores = {}
    for group, profile in models.level1.items():
        s = math.log(models.level1_priors[group])
        s += sum(profile.char_unigram.get(c, profile.char_unigram[""]) for c in chars)
        s += sum(profile.char_bigram.get(b, profile.char_bigram[""]) for b in bigrams)
        scores[group] = s
    return scores


def _score_level2(text: str, models: LanguageModelSet) -> dict[str, float]:
    words = _word_tokens(text)
    scores = {}
    for lang, profile in models.level2.items():
        s = math.log(models.level2_priors[lang])
        s += sum(profile.word_unigram.get(w, profile.word_unigram[""]) for w in words)
        scores[lang] = s
    return scores


def identify(
    text: str, models: LanguageModelSet, use_shortcut: bool = True
) -> tuple[str, str, dict[str, float]]:
    """Return (language tag, level-1 group, per-class log-scores).

    Ties break lexicographically on the class tag.  Empty or
    whitespace-only input raises UnknownLanguageError.  The Unicode-block
    shortcut can be disabled to force the statistical path.
    """
    if not text or not text.strip():
        raise UnknownLanguageError("empty or whitespace-only input")

    shortcut = _script_shortcut(text) if use_shortcut else None
    if shortcut is not None:
        return shortcut, shortcut, {shortcut: 0.0}

    scores1 = _score_level1(text, models)
    group = min(scores1, key=lambda g: (-scores1[g], g))
    if group != "european":
        return group, group, scores1
    scores2 = _score_level2(text, models)
    lang = min(scores2, key=lambda l: (-scores2[l], l))
    all_scores = dict(scores1)
    all_scores.update(scores2)
    return lang, group, all_scores


@dataclass
class EvaluationRow:
    language: str
    documents: int
    level1_errors: int
    level2_errors: int


def evaluate(models: LanguageModelSet, labeled_test: list[tuple[str, str]]) -> list[EvaluationRow]:
    """Per-language document and error counts at both levels."""
    rows: dict[str, EvaluationRow] = {}
    for text, lang in labeled_test:
        row = rows.setdefault(lang, EvaluationRow(lang, 0, 0, 0))
        row.documents += 1
        predicted, group, _ = identify(text, models)
        if group != _GROUP_OF[lang]:
            row.level1_errors += 1
        elif predicted != lang:
            row.level2_errors += 1
    return [rows[lang] for lang in sorted(rows)]


def save_models(models: LanguageModelSet, path: str | Path) -> None:
    payload = {
        "schema_version": 1,
        "level1": {g: vars(p) for g, p in models.level1.items()},
        "level2": {l: vars(p) for l, p in models.level2.items()},
        "level1_priors": models.level1_priors,
        "level2_priors": models.level2_priors,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_models(path: str | Path) -> LanguageModelSet:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return LanguageModelSet(
        {g: LanguageProfile(**p) for g, p in payload["level1"].items()},
        {l: LanguageProfile(**p) for l, p in payload["level2"].items()},
        payload["level1_priors"],
        payload["level2_priors"],
    )
