"""Sentence-level 5-class sentiment via recursive composition.

Lexicon polarities at the leaves of a right-branching binary bracketing,
negation flips, intensifier scaling, and averaging over sentiment-bearing
children at internal nodes.  Fully rule-based and deterministic.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .cleansing import split_sentences
from .lexicons import data_path, read_lines

__all__ = [
    "SentimentLabel",
    "CompositionNode",
    "load_lexicon",
    "default_lexicon",
    "analyze_sentence",
    "analyze_document",
    "NEGATORS",
    "INTENSIFIERS",
]

log = logging.getLogger(__name__)

NEGATORS = frozenset({"not", "no", "never", "cannot", "none", "nothing", "nobody", "n't", "dont", "cant", "wont", "isnt", "doesnt"})
INTENSIFIERS = frozenset({"very", "extremely", "really", "so", "totally", "highly", "absolutely", "completely"})

# A negator only flips if a sentiment-bearing token follows within this
# many tokens; beyond that it is inert.
NEGATION_SCOPE = 3

INTENSIFIER_FACTOR = 1.5

CLASSES = ("very_negative", "negative", "neutral", "positive", "very_positive")


@dataclass(frozen=True)
class SentimentLabel:
    label: str
    score: float


@dataclass(frozen=True)
class CompositionNode:
    start: int
    end: int
    score: float
    modifier: str = "none"  # none | negation | intensifier
    children: tuple["CompositionNode", ...] = ()


def _bucket(score: float) -> str:
    # Nearest integer bucket, ties resolved toward zero so that e.g. a
    # flipped 1.5 stays "negative" rather than jumping to "very_negative".
    from math import ceil, copysign

    magnitude = ceil(abs(score) - 0.5)
    idx = int(copysign(magnitude, score))
    idx = max(-2, min(2, idx))
    return CLASSES[idx + 2]


def _clamp(score: float) -> float:
    return max(-2.0, min(2.0, score))


def load_lexicon(path: str | Path) -> dict[str, float]:
    """Load a term -> polarity score file; scores must lie in [-2, 2]."""
    lexicon: dict[str, float] = {}
    for line in read_lines(path):
        term, raw = line.split("\t")
        score = float(raw)
        if not -2.0 <= score <= 2.0:
            raise ValueError(f"score out of range for {term!r}: {score}")
        key = term.lower()
        if key in lexicon:
            log.warning("duplicate lexicon entry %r overrides earlier value", key)
        lexicon[key] = score
    return lexicon


_DEFAULT: dict[str, float] = {}


def default_lexicon() -> dict[str, float]:
    if not _DEFAULT:
        _DEFAULT.update(load_lexicon(data_path("sentiment_lexicon.txt")))
    return _DEFAULT


def _tokenize(sentence: str) -> list[str]:
    return [m.group(0).lower() for m in re.finditer(r"[\w']+", sentence)]


def _compose(tokens: list[str], lexicon: dict[str, float], start: int) -> CompositionNode:
    """Right-branching composition over tokens[start:]."""
    n = len(tokens)
    if start == n - 1:
        word = tokens[start]
        return CompositionNode(start, n, _clamp(lexicon.get(word, 0.0)))
    left_word = tokens[start]
    left = CompositionNode(start, start + 1, _clamp(lexicon.get(left_word, 0.0)))
    right = _compose(tokens, lexicon, start + 1)

    if left_word in NEGATORS and _scope_has_polarity(tokens, start + 1, lexicon):
        return CompositionNode(start, n, _clamp(-right.score), "negation", (left, right))
    if left_word in INTENSIFIERS:
        return CompositionNode(start, n, _clamp(INTENSIFIER_FACTOR * right.score), "intensifier", (left, right))

    # Average only sentiment-bearing children; neutral words do not dilute.
    scored = [s for s in (left.score, right.score) if s != 0.0]
    value = sum(scored) / len(scored) if scored else 0.0
    return CompositionNode(start, n, _clamp(value), "none", (left, right))


def _scope_has_polarity(tokens: list[str], start: int, lexicon: dict[str, float]) -> bool:
    window = tokens[start : start + NEGATION_SCOPE]
    return any(
        lexicon.get(t, 0.0) != 0.0 or t in NEGATORS for t in window
    )


def analyze_sentence(
    sentence: str, lexicon: dict[str, float] | None = None
) -> tuple[SentimentLabel, CompositionNode]:
    """Score one sentence; empty input is neutral with an empty tree."""
    lex = lexicon if lexicon is not None else default_lexicon()
    tokens = _tokenize(sentence)
    if not tokens:
        return SentimentLabel("neutral", 0.0), CompositionNode(0, 0, 0.0)
    tree = _compose(tokens, lex, 0)
    return SentimentLabel(_bucket(tree.score), tree.score), tree


def analyze_document(
    text: str, lexicon: dict[str, float] | None = None
) -> tuple[SentimentLabel, list[SentimentLabel]]:
    """Document score is the plain mean of sentence scores."""
    lex = lexicon if lexicon is not None else default_lexicon()
    per_sentence = [analyze_sentence(s, lex)[0] for s in split_sentences(text)]
    if not per_sentence:
        return SentimentLabel("neutral", 0.0), []
    mean = sum(s.score for s in per_sentence) / len(per_sentence)
    return SentimentLabel(_bucket(mean), mean), per_sentence
