"""Loaders for the bundled plain-text lexicons and word lists.

All files live under ``ticketforge/data``: one term per line, optional
tab-separated annotation columns, ``#`` comments ignored.
"""

from __future__ import annotations

import importlib.resources
from pathlib import Path

__all__ = [
    "data_path",
    "read_lines",
    "load_stopwords",
    "load_tag_lexicon",
    "load_entity_lexicon",
    "load_category_lexicon",
    "load_bilingual_lexicon",
    "load_bilingual_corpus",
    "load_wordlist",
]


def data_path(*parts: str) -> Path:
    return Path(importlib.resources.files("ticketforge") / "data" / Path(*parts))


def read_lines(path: str | Path) -> list[str]:
    lines = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    return frozenset(w.lower() for w in read_lines(path or data_path("stopwords_en.txt")))


def load_tag_lexicon(path: str | Path | None = None) -> dict[str, str]:
    lex = {}
    for line in read_lines(path or data_path("tag_lexicon.txt")):
        term, tag = line.split("\t")
        lex[term.lower()] = tag
    return lex


def load_entity_lexicon(path: str | Path | None = None) -> dict[str, str]:
    lex = {}
    for line in read_lines(path or data_path("entity_lexicon.txt")):
        term, etype = line.split("\t")
        lex[term.lower()] = etype
    return lex


def load_category_lexicon(path: str | Path | None = None) -> dict[str, str]:
    """Ontology category per term (action/condition/entity/incident/...)."""
    lex = {}
    for line in read_lines(path or data_path("ontology_categories.txt")):
        term, category = line.split("\t")
        lex[term.lower()] = category
    return lex


def load_bilingual_lexicon(lang: str, path: str | Path | None = None) -> dict[str, str]:
    """Word-for-word source -> English lexicon used as the tuning oracle."""
    lex = {}
    for line in read_lines(path or data_path("bilingual", f"{lang}_lexicon.tsv")):
        src, tgt = line.split("\t")
        lex[src] = tgt
    return lex


def load_bilingual_corpus(lang: str, path: str | Path | None = None) -> list[tuple[str, str]]:
    """Aligned (source sentence, English sentence) training pairs."""
    pairs = []
    for line in read_lines(path or data_path("bilingual", f"{lang}_corpus.tsv")):
        src, tgt = line.split("\t")
        pairs.append((src, tgt))
    return pairs


def load_wordlist(lang: str, path: str | Path | None = None) -> list[str]:
    return read_lines(path or data_path("langid", f"{lang}.txt"))
