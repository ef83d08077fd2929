"""Canonical ticket data model, JSONL ingestion and enriched persistence.

Tickets are one JSON object per line; unknown fields are preserved in an
``extras`` map.  Timestamps are normalized to UTC at load.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from pathlib import Path

from .entities import Entity, Relation
from .sentiment import SentimentLabel
from .summarize import SummaryResult

__all__ = [
    "Ticket",
    "TextInsights",
    "CorpusStats",
    "Rejection",
    "TicketError",
    "load_tickets",
    "corpus_stats",
    "persist_enriched",
    "load_enriched",
    "parse_ticket",
]

TICKET_TYPES = ("incident", "problem", "change", "service_request")

_KNOWN_FIELDS = {
    "ticket_id", "ticket_type", "created_at", "resolved_at", "priority",
    "category", "subcategory", "assignment_group", "agent_id",
    "sla_target_minutes", "description", "resolution", "device_id",
    "related_change_id", "csat_score", "csat_comment", "source_system",
}


class TicketError(ValueError):
    """Raised for malformed or invariant-violating ticket records."""


def _parse_timestamp(raw: str, field_name: str) -> datetime:
    try:
        ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except (ValueError, AttributeError, TypeError) as exc:
        raise TicketError(f"{field_name}: invalid RFC 3339 timestamp {raw!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class Ticket:
    ticket_id: str
    ticket_type: str
    created_at: datetime
    priority: int
    category: str
    assignment_group: str
    description: str
    source_system: str
    resolved_at: datetime | None = None
    subcategory: str | None = None
    agent_id: str | None = None
    sla_target_minutes: int | None = None
    resolution: str | None = None
    device_id: str | None = None
    related_change_id: str | None = None
    csat_score: int | None = None
    csat_comment: str | None = None
    extras: dict = field(default_factory=dict)

    def turnaround_minutes(self) -> float | None:
        if self.resolved_at is None:
            return None
        return (self.resolved_at - self.created_at).total_seconds() / 60.0

    def to_dict(self) -> dict:
        d = {
            "ticket_id": self.ticket_id,
            "ticket_type": self.ticket_type,
            "created_at": self.created_at.isoformat(),
            "priority": self.priority,
            "category": self.category,
            "assignment_group": self.assignment_group,
            "description": self.description,
            "source_system": self.source_system,
        }
        if self.resolved_at is not None:
            d["resolved_at"] = self.resolved_at.isoformat()
        for name in ("subcategory", "agent_id", "sla_target_minutes", "resolution",
                     "device_id", "related_change_id", "csat_score", "csat_comment"):
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        d.update(self.extras)
        return d


def parse_ticket(record: dict) -> Ticket:
    """Validate a raw JSON record and build a Ticket; raises TicketError."""
    for required in ("ticket_id", "ticket_type", "created_at", "priority",
                     "category", "assignment_group", "description", "source_system"):
        if required not in record:
            raise TicketError(f"missing required field {required!r}")
    if record["ticket_type"] not in TICKET_TYPES:
        raise TicketError(f"ticket_type must be one of {TICKET_TYPES}, got {record['ticket_type']!r}")
    priority = record["priority"]
    if not isinstance(priority, int) or priority not in (1, 2, 3, 4):
        raise TicketError(f"priority must be in 1..4, got {priority!r}")
    created_at = _parse_timestamp(record["created_at"], "created_at")
    resolved_at = None
    if record.get("resolved_at") is not None:
        resolved_at = _parse_timestamp(record["resolved_at"], "resolved_at")
        if resolved_at < created_at:
            raise TicketError("resolved_at precedes created_at")
    csat = record.get("csat_score")
    if csat is not None and (not isinstance(csat, int) or not 1 <= csat <= 5):
        raise TicketError(f"csat_score must be in 1..5, got {csat!r}")
    sla = record.get("sla_target_minutes")
    if sla is not None and (not isinstance(sla, int) or sla <= 0):
        raise TicketError(f"sla_target_minutes must be a positive integer, got {sla!r}")
    extras = {k: v for k, v in record.items() if k not in _KNOWN_FIELDS}
    return Ticket(
        ticket_id=str(record["ticket_id"]),
        ticket_type=record["ticket_type"],
        created_at=created_at,
        resolved_at=resolved_at,
        priority=priority,
        category=str(record["category"]),
        subcategory=record.get("subcategory"),
        assignment_group=str(record["assignment_group"]),
        agent_id=record.get("agent_id"),
        sla_target_minutes=sla,
        description=str(record["description"]),
        resolution=record.get("resolution"),
        device_id=record.get("device_id"),
        related_change_id=record.get("related_change_id"),
        csat_score=csat,
        csat_comment=record.get("csat_comment"),
        source_system=str(record["source_system"]),
        extras=extras,
    )


@dataclass(frozen=True)
class Rejection:
    line: int
    reason: str


def load_tickets(path: str | Path, strict: bool = False) -> tuple[list[Ticket], list[Rejection]]:
    """Load a JSONL ticket file.

    In strict mode the first invalid line raises; otherwise invalid lines
    become rejection records.  Duplicate ticket ids are invalid.
    """
    tickets: list[Ticket] = []
    rejections: list[Rejection] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
                ticket = parse_ticket(record)
                if ticket.ticket_id in seen_ids:
                    raise TicketError(f"duplicate ticket_id {ticket.ticket_id!r}")
            except (json.JSONDecodeError, TicketError) as exc:
                if strict:
                    raise TicketError(f"line {lineno}: {exc}") from exc
                rejections.append(Rejection(lineno, str(exc)))
                continue
            seen_ids.add(ticket.ticket_id)
            tickets.append(ticket)
    return tickets, rejections


@dataclass
class CorpusStats:
    ticket_count: int
    per_type: dict[str, int]
    per_priority: dict[int, int]
    first_created: datetime | None
    last_created: datetime | None
    mean_turnaround_minutes: float | None
    median_turnaround_minutes: float | None


def corpus_stats(tickets: list[Ticket]) -> CorpusStats:
    """Deterministic one-pass statistics; empty corpus yields zero counts."""
    per_type: dict[str, int] = {}
    per_priority: dict[int, int] = {}
    turnarounds = []
    for t in tickets:
        per_type[t.ticket_type] = per_type.get(t.ticket_type, 0) + 1
        per_priority[t.priority] = per_priority.get(t.priority, 0) + 1
        ta = t.turnaround_minutes()
        if ta is not None:
            turnarounds.append(ta)
    created = [t.created_at for t in tickets]
    return CorpusStats(
        ticket_count=len(tickets),
        per_type=per_type,
        per_priority=per_priority,
        first_created=min(created) if created else None,
        last_created=max(created) if created else None,
        mean_turnaround_minutes=statistics.fmean(turnarounds) if turnarounds else None,
        median_turnaround_minutes=statistics.median(turnarounds) if turnarounds else None,
    )


@dataclass
class TextInsights:
    ticket_id: str
    language: str
    translated_description: str | None = None
    translated_resolution: str | None = None
    entities: list[Entity] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)
    description_topic: str | None = None
    resolution_topic: str | None = None
    summary: SummaryResult | None = None
    sentiment: SentimentLabel | None = None
    oov_tokens: list[str] = field(default_factory=list)
    propagation_flags: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "ticket_id": self.ticket_id,
            "language": self.language,
            "translated_description": self.translated_description,
            "translated_resolution": self.translated_resolution,
            "entities": [asdict(e) for e in self.entities],
            "relations": [asdict(r) for r in self.relations],
            "description_topic": self.description_topic,
            "resolution_topic": self.resolution_topic,
            "summary": asdict(self.summary) if self.summary else None,
            "sentiment": asdict(self.sentiment) if self.sentiment else None,
            "oov_tokens": self.oov_tokens,
            "propagation_flags": self.propagation_flags,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TextInsights":
        return cls(
            ticket_id=d["ticket_id"],
            language=d["language"],
            translated_description=d.get("translated_description"),
            translated_resolution=d.get("translated_resolution"),
            entities=[Entity(**e) for e in d.get("entities", [])],
            relations=[Relation(**r) for r in d.get("relations", [])],
            description_topic=d.get("description_topic"),
            resolution_topic=d.get("resolution_topic"),
            summary=SummaryResult(**d["summary"]) if d.get("summary") else None,
            sentiment=SentimentLabel(**d["sentiment"]) if d.get("sentiment") else None,
            oov_tokens=d.get("oov_tokens", []),
            propagation_flags=d.get("propagation_flags", []),
        )


def _jsonl_bytes(records: list[dict]) -> bytes:
    lines = [json.dumps(r, sort_keys=True, ensure_ascii=False) for r in records]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def persist_enriched(
    tickets: list[Ticket], insights: list[TextInsights], path: str | Path
) -> dict:
    """Write tickets + insights to a directory, returning the manifest.

    Every insight must join to a ticket; writing is deterministic so a
    second persist of the same data is byte-identical.
    """
    ids = {t.ticket_id for t in tickets}
    for ins in insights:
        if ins.ticket_id not in ids:
            raise TicketError(f"insight references unknown ticket_id {ins.ticket_id!r}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    ticket_bytes = _jsonl_bytes([t.to_dict() for t in tickets])
    insight_bytes = _jsonl_bytes([i.to_dict() for i in insights])
    (out / "tickets.jsonl").write_bytes(ticket_bytes)
    (out / "insights.jsonl").write_bytes(insight_bytes)
    manifest = {
        "schema_version": 1,
        "ticket_count": len(tickets),
        "insight_count": len(insights),
        "tickets_sha256": hashlib.sha256(ticket_bytes).hexdigest(),
        "insights_sha256": hashlib.sha256(insight_bytes).hexdigest(),
    }
    (out / "manifest.json").write_bytes(
        (json.dumps(manifest, sort_keys=True, indent=2) + "\n").encode("utf-8")
    )
    return manifest


def load_enriched(path: str | Path) -> tuple[list[Ticket], list[TextInsights]]:
    """Inverse of persist_enriched; verifies content hashes."""
    base = Path(path)
    manifest = json.loads((base / "manifest.json").read_text(encoding="utf-8"))
    ticket_bytes = (base / "tickets.jsonl").read_bytes()
    insight_bytes = (base / "insights.jsonl").read_bytes()
    if hashlib.sha256(ticket_bytes).hexdigest() != manifest["tickets_sha256"]:
        raise TicketError("tickets.jsonl content hash mismatch")
    if hashlib.sha256(insight_bytes).hexdigest() != manifest["insights_sha256"]:
        raise TicketError("insights.jsonl content hash mismatch")
    tickets = [parse_ticket(json.loads(line)) for line in ticket_bytes.decode("utf-8").splitlines() if line]
    insights = [TextInsights.from_dict(json.loads(line)) for line in insight_bytes.decode("utf-8").splitlines() if line]
    return tickets, insights
