"""Inverted text index plus facet index over tickets and insights.

Generations are immutable: a refresh builds a new generation and the
holder swaps it atomically, so readers never observe partial state.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from datetime import datetime

from .corpus import Ticket, TextInsights

__all__ = [
    "SearchIndex",
    "Query",
    "QueryResult",
    "IndexHolder",
    "FACET_FIELDS",
    "build_index",
    "query",
    "refresh",
]

FACET_FIELDS = (
    "ticket_type",
    "priority",
    "category",
    "assignment_group",
    "language",
    "topic",
    "sentiment",
)

MAX_PAGE_LIMIT = 1000

_WORD_RE = re.compile(r"\w+")


def _index_tokens(ticket: Ticket, insights: TextInsights | None) -> list[str]:
    # the id is indexed so point lookups (q=<ticket_id>) resolve
    parts = [ticket.ticket_id, ticket.description, ticket.resolution or ""]
    if insights is not None:
        if insights.translated_description:
            parts.append(insights.translated_description)
        if insights.translated_resolution:
            parts.append(insights.translated_resolution)
        if insights.summary:
            parts.extend(insights.summary.sentences)
    return [m.group(0).lower() for part in parts for m in _WORD_RE.finditer(part)]


def _facet_values(ticket: Ticket, insights: TextInsights | None) -> dict[str, str]:
    return {
        "ticket_type": ticket.ticket_type,
        "priority": str(ticket.priority),
        "category": ticket.category,
        "assignment_group": ticket.assignment_group,
        "language": insights.language if insights else "unknown",
        "topic": (insights.description_topic if insights and insights.description_topic else "unassigned"),
        "sentiment": (insights.sentiment.label if insights and insights.sentiment else "neutral"),
    }


@dataclass
class SearchIndex:
    generation: int
    documents: dict[str, tuple[Ticket, TextInsights | None]]
    postings: dict[str, dict[str, int]]            # term -> doc id -> tf
    facets: dict[str, dict[str, frozenset[str]]]   # field -> value -> doc ids

    def doc_count(self) -> int:
        return len(self.documents)


@dataclass
class Query:
    terms: list[str] = field(default_factory=list)
    facet_filters: dict[str, list[str]] = field(default_factory=dict)
    date_from: datetime | None = None
    date_to: datetime | None = None
    offset: int = 0
    limit: int = 50
    breakdowns: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.limit > MAX_PAGE_LIMIT:
            raise ValueError(f"limit exceeds {MAX_PAGE_LIMIT}")
        for f in list(self.facet_filters) + list(self.breakdowns):
            if f not in FACET_FIELDS:
                raise ValueError(f"unknown facet field {f!r}")


@dataclass
class QueryResult:
    total: int
    page: list[tuple[Ticket, TextInsights | None]]
    facet_counts: dict[str, dict[str, int]]
    latency_ms: float
    generation: int


def build_index(
    tickets: list[Ticket],
    insights: dict[str, TextInsights] | None = None,
    generation: int = 1,
) -> SearchIndex:
    """Index description/resolution/summary tokens plus facet fields."""
    insights = insights or {}
    documents: dict[str, tuple[Ticket, TextInsights | None]] = {}
    postings: dict[str, dict[str, int]] = {}
    facet_sets: dict[str, dict[str, set[str]]] = {f: {} for f in FACET_FIELDS}
    for ticket in tickets:
        if ticket.ticket_id in documents:
            raise ValueError(f"duplicate ticket id {ticket.ticket_id!r}")
        ins = insights.get(ticket.ticket_id)
        documents[ticket.ticket_id] = (ticket, ins)
        for tok in _index_tokens(ticket, ins):
            per_doc = postings.setdefault(tok, {})
            per_doc[ticket.ticket_id] = per_doc.get(ticket.ticket_id, 0) + 1
        for fld, value in _facet_values(ticket, ins).items():
            facet_sets[fld].setdefault(value, set()).add(ticket.ticket_id)
    facets = {
        fld: {v: frozenset(ids) for v, ids in values.items()}
        for fld, values in facet_sets.items()
    }
    return SearchIndex(generation, documents, postings, facets)


def query(index: SearchIndex, q: Query) -> QueryResult:
    """Boolean AND over terms, AND across facet fields, OR within a field,
    optional date range; ordered by created_at descending then ticket id.

    Facet breakdowns are computed over the full hit set, not the page.
    """
    started = time.perf_counter()
    hits: set[str] | None = None

    for term in q.terms:
        matches = set(index.postings.get(term.lower(), {}))
        hits = matches if hits is None else hits & matches
        if not hits:
            break

    if hits is None:
        hits = set(index.documents)

    for fld, values in q.facet_filters.items():
        allowed: set[str] = set()
        for v in values:
            allowed |= index.facets[fld].get(v, frozenset())
        hits &= allowed

    if q.date_from is not None or q.date_to is not None:
        hits = {
            d
            for d in hits
            if (q.date_from is None or index.documents[d][0].created_at >= q.date_from)
            and (q.date_to is None or index.documents[d][0].created_at <= q.date_to)
        }

    ordered = sorted(
        hits, key=lambda d: (-index.documents[d][0].created_at.timestamp(), d)
    )
    page = [index.documents[d] for d in ordered[q.offset : q.offset + q.limit]]

    facet_counts: dict[str, dict[str, int]] = {}
    for fld in q.breakdowns:
        counts = {}
        for value, ids in index.facets[fld].items():
            c = len(ids & hits)
            if c:
                counts[value] = c
        facet_counts[fld] = dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))

    latency = (time.perf_counter() - started) * 1000.0
    return QueryResult(len(hits), page, facet_counts, latency, index.generation)


def refresh(
    index: SearchIndex,
    new_tickets: list[Ticket],
    new_insights: dict[str, TextInsights] | None = None,
    update: bool = False,
) -> SearchIndex:
    """Build the next generation with documents added (or replaced when
    ``update`` is set).  The old generation is left untouched."""
    new_insights = new_insights or {}
    incoming = {t.ticket_id for t in new_tickets}
    collisions = incoming & set(index.documents)
    if collisions and not update:
        raise ValueError(f"id collision without update flag: {sorted(collisions)[:5]}")

    tickets = [t for tid, (t, _) in index.documents.items() if tid not in incoming]
    insights = {
        tid: ins for tid, (_, ins) in index.documents.items() if ins is not None and tid not in incoming
    }
    tickets.extend(new_tickets)
    insights.update(new_insights)
    return build_index(tickets, insights, generation=index.generation + 1)


class IndexHolder:
    """Single-writer, many-reader holder; swap is a plain atomic rebind."""

    def __init__(self, index: SearchIndex):
        self._index = index

    @property
    def index(self) -> SearchIndex:
        return self._index

    def swap(self, new_index: SearchIndex) -> None:
        if new_index.generation <= self._index.generation:
            raise ValueError("generation must advance")
        self._index = new_index
