/**
 * ExplorerState: the complete description of what the analyst is looking at.
 *
 * The state serializes to a URL query string (shareable views) using the
 * same parameter names the search API accepts, plus a `ticket` parameter
 * for the detail panel selection. parseState(serializeState(s)) === s.
 */

export const FACET_FIELDS = [
  "ticket_type",
  "priority",
  "category",
  "assignment_group",
  "language",
  "topic",
  "sentiment",
] as const;

export type FacetField = (typeof FACET_FIELDS)[number];

export interface ExplorerState {
  terms: string[];
  facets: Partial<Record<FacetField, string[]>>;
  dateFrom: string | null;
  dateTo: string | null;
  breakdowns: FacetField[];
  offset: number;
  limit: number;
  selectedTicket: string | null;
}

export const DEFAULT_LIMIT = 25;

// Every facet field is broken down by default so the sidebar always has bars.
export function defaultState(): ExplorerState {
  return {
    terms: [],
    facets: {},
    dateFrom: null,
    dateTo: null,
    breakdowns: [...FACET_FIELDS],
    offset: 0,
    limit: DEFAULT_LIMIT,
    selectedTicket: null,
  };
}

function isFacetField(name: string): name is FacetField {
  return (FACET_FIELDS as readonly string[]).includes(name);
}

/** Query parameters for GET /api/search (selection is client-only). */
export function toSearchParams(state: ExplorerState): URLSearchParams {
  const params = new URLSearchParams();
  if (state.terms.length > 0) {
    params.set("q", state.terms.join(" "));
  }
  for (const field of FACET_FIELDS) {
    for (const value of state.facets[field] ?? []) {
      params.append(`facet.${field}`, value);
    }
  }
  if (state.dateFrom) params.set("from", state.dateFrom);
  if (state.dateTo) params.set("to", state.dateTo);
  for (const field of state.breakdowns) {
    params.append("breakdown", field);
  }
  if (state.offset !== 0) params.set("offset", String(state.offset));
  params.set("limit", String(state.limit));
  return params;
}

/** Full state as a URL query string, including the selected ticket. */
export function serializeState(state: ExplorerState): string {
  const params = toSearchParams(state);
  if (state.selectedTicket) params.set("ticket", state.selectedTicket);
  return params.toString();
}

/** Inverse of serializeState; unknown parameters are ignored. */
export function parseState(query: string): ExplorerState {
  const params = new URLSearchParams(query);
  const state = defaultState();
  const q = params.get("q");
  state.terms = q ? q.split(/\s+/).filter((t) => t.length > 0) : [];
  for (const [key, value] of params.entries()) {
    if (key.startsWith("facet.")) {
      const field = key.slice("facet.".length);
      if (isFacetField(field)) {
        (state.facets[field] ??= []).push(value);
      }
    }
  }
  state.dateFrom = params.get("from");
  state.dateTo = params.get("to");
  const breakdowns = params.getAll("breakdown").filter(isFacetField);
  // serializeState always emits limit, so its breakdown list (possibly
  // empty) is authoritative; bare URLs keep the default breakdowns
  if (params.has("limit") || breakdowns.length > 0) {
    state.breakdowns = breakdowns;
  }
  state.offset = Number(params.get("offset") ?? 0) || 0;
  state.limit = Number(params.get("limit") ?? DEFAULT_LIMIT) || DEFAULT_LIMIT;
  state.selectedTicket = params.get("ticket");
  return state;
}

// --- Pure state transitions -------------------------------------------------

function clone(state: ExplorerState): ExplorerState {
  return {
    ...state,
    terms: [...state.terms],
    facets: Object.fromEntries(
      Object.entries(state.facets).map(([k, v]) => [k, [...(v as string[])]])
    ),
    breakdowns: [...state.breakdowns],
  };
}

/** Add the value if absent, remove it if present; resets paging. */
export function toggleFacet(
  state: ExplorerState,
  field: FacetField,
  value: string
): ExplorerState {
  const next = clone(state);
  const current = next.facets[field] ?? [];
  const updated = current.includes(value)
    ? current.filter((v) => v !== value)
    : [...current, value];
  if (updated.length > 0) {
    next.facets[field] = updated;
  } else {
    delete next.facets[field];
  }
  next.offset = 0;
  return next;
}

export function setTerms(state: ExplorerState, text: string): ExplorerState {
  const next = clone(state);
  next.terms = text.split(/\s+/).filter((t) => t.length > 0);
  next.offset = 0;
  return next;
}

export function setDateRange(
  state: ExplorerState,
  from: string | null,
  to: string | null
): ExplorerState {
  const next = clone(state);
  next.dateFrom = from;
  next.dateTo = to;
  next.offset = 0;
  return next;
}

/** Topic drill is a plain facet filter on the topic field. */
export function drillTopic(state: ExplorerState, label: string): ExplorerState {
  const next = clone(state);
  next.facets.topic = [label];
  next.offset = 0;
  return next;
}

export function setPage(state: ExplorerState, offset: number): ExplorerState {
  const next = clone(state);
  next.offset = Math.max(0, offset);
  return next;
}

export function selectTicket(
  state: ExplorerState,
  ticketId: string | null
): ExplorerState {
  const next = clone(state);
  next.selectedTicket = ticketId;
  return next;
}
