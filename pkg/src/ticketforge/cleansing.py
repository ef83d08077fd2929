"""Text cleansing and feature extraction.

Tokenization, normalization, stopword elimination, suffix stemming,
keyword-candidate selection, sentence filters and term-document matrix
construction.  Everything here is pure and deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

__all__ = [
    "Token",
    "TokenStream",
    "CleansingConfig",
    "TermDocumentMatrix",
    "cleanse",
    "frequency_stopwords",
    "keyword_candidates",
    "filter_sentences",
    "build_tdm",
    "split_sentences",
    "stem",
    "pos_tag",
]

_TOKEN_RE = re.compile(r"\w+|[^\w\s]+", re.UNICODE)


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    start: int
    end: int
    sentence: int


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...] = ()

    def normalized(self) -> list[str]:
        return [t.normalized for t in self.tokens]

    def join(self) -> str:
        return " ".join(t.normalized for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class CleansingConfig:
    case_elimination: bool = True
    punctuation_removal: bool = True
    stemming: bool = False
    frequency_stopwords: bool = False
    domain_stopwords: bool = False
    entity_elimination: bool = False
    pos_filter: bool = False
    sentiment_filter: bool = False
    frequency_stopword_ratio: float = 0.4

    def __post_init__(self):
        if not 0.0 < self.frequency_stopword_ratio <= 1.0:
            raise ValueError(
                f"frequency_stopword_ratio must be in (0,1], got {self.frequency_stopword_ratio}"
            )


# Suffix rules, tried in order and re-applied until a fixed point so that
# stemming is idempotent.  A rule fires only when the remaining stem keeps
# at least 3 characters.
_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ization", "ize"),
    ("ational", "ate"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("iveness", "ive"),
    ("ibility", "ible"),
    ("ability", "able"),
    ("ements", "ement"),
    ("sses", "ss"),
    ("ment", ""),
    ("ness", ""),
    ("ings", "ing"),
    ("ies", "y"),
    ("ied", "y"),
    ("ing", ""),
    ("ers", "er"),
    ("est", ""),
    ("ed", ""),
    ("ly", ""),
    ("es", "e"),
    ("s", ""),
)

_DOUBLE_CONSONANTS = ("bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt")


def stem(word: str) -> str:
    """Strip inflectional suffixes from a lowercase word (fixed point)."""
    current = word
    for _ in range(5):
        nxt = _stem_once(current)
        if nxt == current:
            return current
        current = nxt
    return current


def _stem_once(word: str) -> str:
    for suffix, repl in _SUFFIX_RULES:
        if word.endswith(suffix):
            stem_part = word[: len(word) - len(suffix)] + repl
            if len(stem_part) < 3:
                continue
            if stem_part.endswith(_DOUBLE_CONSONANTS):
                stem_part = stem_part[:-1]
            return stem_part
    return word


_PUNCT_ONLY_RE = re.compile(r"^[^\w\s]+$", re.UNICODE)

_SENT_BOUNDARY_RE = re.compile(r"(?<=[.!?])(?:\s+(?=[A-Z0-9À-ɏ])|\s*\n+)")


def split_sentences(text: str) -> list[str]:
    """Split on ./!/? followed by whitespace+capital, or on line breaks."""
    parts = [p.strip() for p in re.split(r"\n+", text)]
    sentences: list[str] = []
    for part in parts:
        if not part:
            continue
        for sent in _SENT_BOUNDARY_RE.split(part):
            sent = sent.strip()
            if sent:
                sentences.append(sent)
    return sentences


def _sentence_spans(text: str) -> list[tuple[int, int]]:
    spans: list[tuple[int, int]] = []
    cursor = 0
    for sent in split_sentences(text):
        start = text.find(sent, cursor)
        if start < 0:
            start = cursor
        spans.append((start, start + len(sent)))
        cursor = start + len(sent)
    return spans


def _lower(surface: str) -> str:
    # skip one-to-many case mappings (e.g. 'İ' -> 'i' + combining dot)
    # so that lowering never changes the token boundary structure
    return "".join(c if len(c.lower()) != 1 else c.lower() for c in surface)


def cleanse(
    text: str,
    config: CleansingConfig = CleansingConfig(),
    domain_stopwords: frozenset[str] | set[str] = frozenset(),
    entity_spans: tuple[tuple[int, int], ...] = (),
) -> TokenStream:
    """Tokenize and normalize text, applying only the enabled stages.

    Stage order is fixed: tokenize, case elimination, punctuation strip,
    stopword elimination, entity elimination, stemming.  ``domain_stopwords``
    is consulted only when the corresponding flag is on; frequency stopwords
    are merged into the same set by the caller.
    """
    spans = _sentence_spans(text)

    def sentence_of(pos: int) -> int:
        for i, (s, e) in enumerate(spans):
            if s <= pos < e:
                return i
        return max(0, len(spans) - 1)

    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        surface = m.group(0)
        normalized = _lower(surface) if config.case_elimination else surface
        tokens.append(Token(surface, normalized, m.start(), m.end(), sentence_of(m.start())))

    if config.punctuation_removal:
        tokens = [t for t in tokens if not _PUNCT_ONLY_RE.match(t.normalized)]

    if config.domain_stopwords or config.frequency_stopwords:
        stopset = {w.lower() for w in domain_stopwords}
        tokens = [t for t in tokens if t.normalized.lower() not in stopset]

    if config.entity_elimination and entity_spans:
        tokens = [
            t
            for t in tokens
            if not any(s < t.end and t.start < e for s, e in entity_spans)
        ]

    if config.stemming:
        tokens = [replace(t, normalized=stem(t.normalized)) for t in tokens]

    return TokenStream(tuple(tokens))


@dataclass
class TermDocumentMatrix:
    """Sparse nonnegative term counts per document."""

    terms: tuple[str, ...]
    doc_ids: tuple[str, ...]
    counts: dict[str, dict[str, int]]  # term -> doc_id -> count

    def document_frequency(self, term: str) -> int:
        return len(self.counts.get(term, {}))

    def term_frequency(self, term: str) -> int:
        return sum(self.counts.get(term, {}).values())

    def total_count(self) -> int:
        return sum(sum(d.values()) for d in self.counts.values())

    def to_dense(self):
        import numpy as np

        term_idx = {t: i for i, t in enumerate(self.terms)}
        doc_idx = {d: j for j, d in enumerate(self.doc_ids)}
        mat = np.zeros((len(self.terms), len(self.doc_ids)))
        for term, docs in self.counts.items():
            for doc, c in docs.items():
                mat[term_idx[term], doc_idx[doc]] = c
        return mat


def build_tdm(streams: list[TokenStream], doc_ids: list[str]) -> TermDocumentMatrix:
    """Count term occurrences per document over normalized tokens."""
    if len(set(doc_ids)) != len(doc_ids):
        raise ValueError("duplicate document ids")
    if len(streams) != len(doc_ids):
        raise ValueError("streams and doc_ids must align")
    counts: dict[str, dict[str, int]] = {}
    for stream, doc in zip(streams, doc_ids):
        for tok in stream.tokens:
            per_doc = counts.setdefault(tok.normalized, {})
            per_doc[doc] = per_doc.get(doc, 0) + 1
    terms = tuple(sorted(counts))
    return TermDocumentMatrix(terms, tuple(doc_ids), counts)


def frequency_stopwords(tdm: TermDocumentMatrix, ratio: float) -> set[str]:
    """Terms whose document frequency exceeds ratio * document count (strict >)."""
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0,1], got {ratio}")
    n_docs = len(tdm.doc_ids)
    if n_docs == 0:
        return set()
    return {t for t in tdm.terms if tdm.document_frequency(t) / n_docs > ratio}


_ALLCAPS_RE = re.compile(r"^[A-Z][A-Z0-9]*[A-Z][A-Z0-9]*$")
_CODE_RE = re.compile(r"^(?=.*[A-Za-z])(?=.*\d)[A-Za-z0-9]+$")


def keyword_candidates(text: str) -> list[str]:
    """Tokens matching the candidate rules, de-duplicated in source order.

    Rules: all-caps runs of two or more characters, tokens with two or more
    underscores, tokens with two or more dots (IP-address shaped or not),
    and mixed letter+digit alphanumeric codes.
    """
    seen: set[str] = set()
    out: list[str] = []
    for raw in text.split():
        token = raw.strip(",;:!?()[]{}'\"")
        token = token.rstrip(".") if token.count(".") < 2 else token.strip("()[]{},;:!?'\"")
        if not token:
            continue
        hit = (
            _ALLCAPS_RE.match(token) is not None
            or token.count("_") >= 2
            or token.count(".") >= 2
            or _CODE_RE.match(token) is not None
        )
        if hit and token not in seen:
            seen.add(token)
            out.append(token)
    return out


# Part-of-speech tagging: closed-class lexicon plus suffix heuristics.
# Tags: noun, verb, adj, adv, det, prep, pron, conj, aux, num, other.

_DEFAULT_TAGS: dict[str, str] = {}


def _builtin_tag_lexicon() -> dict[str, str]:
    global _DEFAULT_TAGS
    if not _DEFAULT_TAGS:
        from .lexicons import load_tag_lexicon

        _DEFAULT_TAGS = load_tag_lexicon()
    return _DEFAULT_TAGS


def pos_tag(words: list[str], tag_lexicon: dict[str, str] | None = None) -> list[str]:
    """Heuristic tagger: lexicon lookup first, then suffix rules, noun default."""
    lex = tag_lexicon if tag_lexicon is not None else _builtin_tag_lexicon()
    tags = []
    for w in words:
        lw = w.lower()
        if lw in lex:
            tags.append(lex[lw])
        elif lw.isdigit():
            tags.append("num")
        elif lw.endswith(("ing", "ed", "ify", "ize", "ise")) and len(lw) > 4:
            tags.append("verb")
        elif lw.endswith("ly") and len(lw) > 3:
            tags.append("adv")
        elif lw.endswith(("ous", "ful", "ive", "ible", "able", "ic", "al")) and len(lw) > 4:
            tags.append("adj")
        else:
            tags.append("noun")
    return tags


def filter_sentences(
    text: str,
    mode: str,
    sentiment_lexicon: dict[str, float] | None = None,
    tag_lexicon: dict[str, str] | None = None,
) -> str:
    """Keep only negative sentences or only noun/verb-phrase tokens.

    ``mode`` is ``sentiment_negative_only`` or ``pos_noun_verb_phrases``.
    """
    if mode == "sentiment_negative_only":
        from .sentiment import analyze_sentence, default_lexicon

        lex = sentiment_lexicon if sentiment_lexicon is not None else default_lexicon()
        kept = []
        for sent in split_sentences(text):
            label, _ = analyze_sentence(sent, lex)
            if label.label in ("negative", "very_negative"):
                kept.append(sent)
        return " ".join(kept)
    if mode == "pos_noun_verb_phrases":
        kept_tokens = []
        for sent in split_sentences(text):
            words = [m.group(0) for m in re.finditer(r"\w+", sent)]
            tags = pos_tag(words, tag_lexicon)
            kept_tokens.extend(
                w for w, tag in zip(words, tags) if tag in ("noun", "verb", "adj")
            )
        return " ".join(kept_tokens)
    raise ValueError(f"unknown filter mode: {mode}")
