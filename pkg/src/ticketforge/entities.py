"""Entity and relation extraction over raw ticket text.

Rule pass (all-caps, underscores, dotted tokens, IP shapes), lexicon
look-ups, and a capitalization fallback; relations pair entities with
their nearest verb inside each sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cleansing import pos_tag, split_sentences, stem
from .lexicons import data_path, load_entity_lexicon

__all__ = [
    "Entity",
    "Relation",
    "extract_entities",
    "extract_relations",
    "default_entity_lexicon",
]

ENTITY_TYPES = ("application", "server", "ip_address", "printer", "user", "other")


@dataclass(frozen=True)
class Entity:
    surface: str
    entity_type: str
    start: int
    end: int
    provenance: str  # rule | lexicon | ner


@dataclass(frozen=True)
class Relation:
    subject: str
    action: str
    object: str | None
    sentence: int


_DEFAULT_LEX: dict[str, str] = {}


def default_entity_lexicon() -> dict[str, str]:
    if not _DEFAULT_LEX:
        _DEFAULT_LEX.update(load_entity_lexicon(data_path("entity_lexicon.txt")))
    return _DEFAULT_LEX


_WORDLIKE_RE = re.compile(r"[\w.]+")
_ALLCAPS_RE = re.compile(r"^[A-Z][A-Z0-9]*[A-Z][A-Z0-9]*$")
_OCTET_RE = re.compile(r"^\d{1,3}(\.\d{1,3}){3}$")
_CAPWORD_RE = re.compile(r"^[A-Z][a-z]+$")


def _is_ip(token: str) -> bool:
    if not _OCTET_RE.match(token):
        return False
    return all(int(part) <= 255 for part in token.split("."))


def extract_entities(text: str, lexicon: dict[str, str] | None = None) -> list[Entity]:
    """Rule pass first, lexicon pass on remaining tokens, then NER fallback.

    Overlaps are resolved longest-match-first; spans never overlap in the
    returned list, which is ordered by start offset.
    """
    lex = lexicon if lexicon is not None else default_entity_lexicon()
    candidates: list[Entity] = []

    tokens = [(m.group(0), m.start(), m.end()) for m in _WORDLIKE_RE.finditer(text)]
    for raw, start, end in tokens:
        token = raw
        # Sentence-final tokens keep a trailing dot from tokenization.
        if token.endswith(".") and not _is_ip(token):
            token = token.rstrip(".")
            end = start + len(token)
        if not token:
            continue
        if _is_ip(token):
            candidates.append(Entity(token, "ip_address", start, end, "rule"))
        elif token.count(".") >= 2:
            candidates.append(Entity(token, "other", start, end, "rule"))
        elif token.count("_") >= 2:
            candidates.append(Entity(token, "server", start, end, "rule"))
        elif _ALLCAPS_RE.match(token):
            candidates.append(Entity(token, "application", start, end, "rule"))
        elif token.lower() in lex:
            candidates.append(Entity(token, lex[token.lower()], start, end, "lexicon"))

    # NER fallback: capitalized runs that are not sentence-initial.
    sentence_starts = set()
    cursor = 0
    for sent in split_sentences(text):
        pos = text.find(sent, cursor)
        if pos >= 0:
            sentence_starts.add(pos)
            cursor = pos + len(sent)
    run: list[tuple[str, int, int]] = []
    for raw, start, end in tokens + [("", len(text), len(text))]:
        if _CAPWORD_RE.match(raw) and start not in sentence_starts:
            run.append((raw, start, end))
        else:
            if run:
                surface = text[run[0][1] : run[-1][2]]
                candidates.append(Entity(surface, "other", run[0][1], run[-1][2], "ner"))
            run = []

    # Longest match wins; earlier start then rule provenance break ties.
    order = {"rule": 0, "lexicon": 1, "ner": 2}
    candidates.sort(key=lambda e: (-(e.end - e.start), e.start, order[e.provenance]))
    chosen: list[Entity] = []
    for cand in candidates:
        if all(cand.end <= c.start or c.end <= cand.start for c in chosen):
            chosen.append(cand)
    chosen.sort(key=lambda e: e.start)
    return chosen


def extract_relations(text: str, entities: list[Entity]) -> list[Relation]:
    """Pair each entity with its nearest verb within the sentence.

    The entity before the verb becomes the subject; the nearest entity on
    the far side becomes the object.  Ties in distance prefer the
    preceding verb.  Entities that already serve as an object are not
    re-emitted as subjects of the same verb.
    """
    relations: list[Relation] = []
    cursor = 0
    for sent_idx, sent in enumerate(split_sentences(text)):
        offset = text.find(sent, cursor)
        if offset < 0:
            offset = cursor
        cursor = offset + len(sent)
        words = [(m.group(0), offset + m.start(), offset + m.end()) for m in re.finditer(r"[\w.]+", sent)]
        tags = pos_tag([w for w, _, _ in words])
        verb_positions = [i for i, t in enumerate(tags) if t == "verb"]
        if not verb_positions:
            continue
        ent_positions: list[tuple[Entity, int]] = []
        for ent in entities:
            if offset <= ent.start < offset + len(sent):
                for i, (_, ws, we) in enumerate(words):
                    if ws <= ent.start < we:
                        ent_positions.append((ent, i))
                        break
        claimed_objects: set[tuple[int, str]] = set()
        for ent, pos in ent_positions:
            verb = min(
                verb_positions,
                key=lambda v: (abs(v - pos), 0 if v < pos else 1),
            )
            if (verb, ent.surface) in claimed_objects:
                continue
            action = stem(words[verb][0].lower())
            obj = None
            if pos < verb:
                after = [e for e, p in ent_positions if p > verb]
                if after:
                    nearest = min(after, key=lambda e: e.start)
                    obj = nearest.surface
                    claimed_objects.add((verb, nearest.surface))
                relations.append(Relation(ent.surface, action, obj, sent_idx))
            else:
                before = [e for e, p in ent_positions if p < verb]
                if not before:
                    relations.append(Relation(ent.surface, action, None, sent_idx))
    return relations
