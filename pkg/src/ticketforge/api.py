"""HTTP JSON API over the search index.

Endpoints: GET /api/search, /api/stats, /api/topics, /api/rules and
POST /api/refresh (JSONL body).  Every response carries schema_version.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from datetime import datetime

from fastapi import FastAPI, Request, Response

from . import engine as engine_mod
from .corpus import TextInsights, TicketError, corpus_stats, parse_ticket
from .engine import FACET_FIELDS, IndexHolder, Query

SCHEMA_VERSION = 1


def _error(status: int, message: str) -> Response:
    body = json.dumps({"schema_version": SCHEMA_VERSION, "error": message})
    return Response(body, status_code=status, media_type="application/json")


def _parse_date(raw: str | None, name: str) -> datetime | None:
    if raw is None:
        return None
    try:
        return datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ValueError(f"invalid {name!r} date: {raw}") from exc


def create_app(
    holder: IndexHolder,
    topics_payload: list[dict] | None = None,
    rules_payload: list[dict] | None = None,
) -> FastAPI:
    app = FastAPI(title="ticketforge", docs_url=None, redoc_url=None)

    @app.get("/api/search")
    async def search(request: Request):
        params = request.query_params
        try:
            facet_filters: dict[str, list[str]] = {}
            for key in params.keys():
                if key.startswith("facet."):
                    facet_filters[key[len("facet."):]] = list(params.getlist(key))
            q = Query(
                terms=params.get("q", "").split(),
                facet_filters=facet_filters,
                date_from=_parse_date(params.get("from"), "from"),
                date_to=_parse_date(params.get("to"), "to"),
                offset=int(params.get("offset", 0)),
                limit=int(params.get("limit", 50)),
                breakdowns=list(params.getlist("breakdown")),
            )
        except ValueError as exc:
            return _error(400, str(exc))
        index = holder.index
        result = engine_mod.query(index, q)
        return {
            "schema_version": SCHEMA_VERSION,
            "generation": result.generation,
            "total": result.total,
            "latency_ms": result.latency_ms,
            "facets": result.facet_counts,
            "hits": [
                {
                    "ticket": ticket.to_dict(),
                    "insights": insights.to_dict() if insights else None,
                }
                for ticket, insights in result.page
            ],
        }

    @app.get("/api/stats")
    async def stats():
        index = holder.index
        tickets = [t for t, _ in index.documents.values()]
        s = corpus_stats(tickets)
        return {
            "schema_version": SCHEMA_VERSION,
            "generation": index.generation,
            "ticket_count": s.ticket_count,
            "per_type": s.per_type,
            "per_priority": {str(k): v for k, v in s.per_priority.items()},
            "first_created": s.first_created.isoformat() if s.first_created else None,
            "last_created": s.last_created.isoformat() if s.last_created else None,
            "mean_turnaround_minutes": s.mean_turnaround_minutes,
            "median_turnaround_minutes": s.median_turnaround_minutes,
            "facet_fields": list(FACET_FIELDS),
        }

    @app.get("/api/topics")
    async def topics():
        return {"schema_version": SCHEMA_VERSION, "topics": topics_payload or []}

    @app.get("/api/rules")
    async def rules():
        return {"schema_version": SCHEMA_VERSION, "rules": rules_payload or []}

    @app.post("/api/refresh")
    async def refresh(request: Request):
        body = (await request.body()).decode("utf-8")
        update = request.query_params.get("update", "") in ("1", "true")
        tickets, insights = [], {}
        try:
            for lineno, line in enumerate(body.splitlines(), start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                if "language" in record and "ticket_type" not in record:
                    ins = TextInsights.from_dict(record)
                    insights[ins.ticket_id] = ins
                else:
                    tickets.append(parse_ticket(record))
        except (json.JSONDecodeError, TicketError, KeyError) as exc:
            return _error(400, f"line {lineno}: {exc}")
        try:
            new_index = engine_mod.refresh(holder.index, tickets, insights, update=update)
        except ValueError as exc:
            return _error(400, str(exc))
        holder.swap(new_index)
        return {
            "schema_version": SCHEMA_VERSION,
            "generation": new_index.generation,
            "ticket_count": new_index.doc_count(),
        }

    return app
