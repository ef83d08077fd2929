/**
 * DOM rendering. Every function here is a pure mapping from
 * (state, last API response) to elements; no fetching, no aggregation.
 */

import type { ExplorerView } from "./explorer";
import type { ExplorerState, FacetField } from "./state";
import type {
  InsightsPayload,
  SearchHit,
  SearchResponse,
  TicketPayload,
} from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// --- Facet sidebar -----------------------------------------------------------

export function renderFacetBars(
  state: ExplorerState,
  response: SearchResponse,
  onToggle: (field: FacetField, value: string) => void
): HTMLElement {
  const container = el("div", "facets");
  for (const [field, counts] of Object.entries(response.facets)) {
    const section = el("section", "facet-field");
    section.appendChild(el("h3", undefined, field.replace(/_/g, " ")));
    const max = Math.max(1, ...Object.values(counts));
    for (const [value, count] of Object.entries(counts)) {
      const active = (state.facets[field as FacetField] ?? []).includes(value);
      const row = el("button", active ? "facet-bar active" : "facet-bar");
      row.dataset.field = field;
      row.dataset.value = value;
      const fill = el("span", "fill");
      fill.style.width = `${Math.round((100 * count) / max)}%`;
      row.appendChild(fill);
      row.appendChild(el("span", "label", value));
      row.appendChild(el("span", "count", String(count)));
      row.addEventListener("click", () => onToggle(field as FacetField, value));
      section.appendChild(row);
    }
    container.appendChild(section);
  }
  return container;
}

// --- Result table ------------------------------------------------------------

const TABLE_COLUMNS: [string, (h: SearchHit) => string][] = [
  ["id", (h) => h.ticket.ticket_id],
  ["created", (h) => h.ticket.created_at.slice(0, 16).replace("T", " ")],
  ["type", (h) => h.ticket.ticket_type],
  ["prio", (h) => String(h.ticket.priority)],
  ["topic", (h) => h.insights?.description_topic ?? ""],
  ["sentiment", (h) => h.insights?.sentiment?.label ?? ""],
  ["description", (h) => h.ticket.description],
];

export function renderTicketTable(
  response: SearchResponse,
  onSelect: (ticketId: string) => void
): HTMLElement {
  const table = el("table", "tickets");
  const head = table.createTHead().insertRow();
  for (const [name] of TABLE_COLUMNS) {
    head.appendChild(el("th", undefined, name));
  }
  const body = table.createTBody();
  for (const hit of response.hits) {
    const row = body.insertRow();
    row.dataset.ticketId = hit.ticket.ticket_id;
    for (const [, cell] of TABLE_COLUMNS) {
      row.insertCell().textContent = cell(hit);
    }
    row.addEventListener("click", () => onSelect(hit.ticket.ticket_id));
  }
  return table;
}

// --- Detail panel ------------------------------------------------------------

const RAW_FIELDS: (keyof TicketPayload)[] = [
  "ticket_id",
  "ticket_type",
  "created_at",
  "resolved_at",
  "priority",
  "category",
  "subcategory",
  "assignment_group",
  "agent_id",
  "sla_target_minutes",
  "device_id",
  "csat_score",
  "source_system",
];

function definitionList(pairs: [string, string][]): HTMLElement {
  const dl = el("dl", "fields");
  for (const [name, value] of pairs) {
    dl.appendChild(el("dt", undefined, name));
    dl.appendChild(el("dd", undefined, value));
  }
  return dl;
}

/** Description text with OOV tokens visually marked. */
function markedText(text: string, oov: string[]): HTMLElement {
  const container = el("p", "text");
  const oovSet = new Set(oov.map((t) => t.toLowerCase()));
  for (const token of text.split(/(\s+)/)) {
    const bare = token.toLowerCase().replace(/^\W+|\W+$/g, "");
    if (bare && oovSet.has(bare)) {
      container.appendChild(el("mark", "oov", token));
    } else {
      container.appendChild(document.createTextNode(token));
    }
  }
  return container;
}

function insightsSection(insights: InsightsPayload): HTMLElement {
  const section = el("div", "insights");
  section.appendChild(
    definitionList([["language", insights.language]])
  );
  if (insights.translated_description) {
    section.appendChild(el("h4", undefined, "translation"));
    section.appendChild(el("p", "translation", insights.translated_description));
  }
  if (insights.summary) {
    section.appendChild(el("h4", undefined, "summary"));
    const ul = el("ul", "summary");
    for (const sentence of insights.summary.sentences) {
      ul.appendChild(el("li", undefined, sentence));
    }
    section.appendChild(ul);
  }
  if (insights.entities.length > 0) {
    section.appendChild(el("h4", undefined, "entities"));
    const ul = el("ul", "entities");
    for (const entity of insights.entities) {
      ul.appendChild(el("li", undefined, `${entity.surface} [${entity.label}]`));
    }
    section.appendChild(ul);
  }
  if (insights.relations.length > 0) {
    section.appendChild(el("h4", undefined, "relations"));
    const ul = el("ul", "relations");
    for (const r of insights.relations) {
      ul.appendChild(
        el("li", undefined, `${r.subject} --${r.action ?? "?"}--> ${r.object}`)
      );
    }
    section.appendChild(ul);
  }
  if (insights.sentiment) {
    section.appendChild(
      el(
        "p",
        "sentiment",
        `sentiment: ${insights.sentiment.label} (${insights.sentiment.score.toFixed(2)})`
      )
    );
  }
  for (const flag of insights.propagation_flags) {
    section.appendChild(
      el(
        "p",
        "propagation-flag",
        `may trigger "${flag.consequent}" ` +
          `(confidence ${flag.confidence.toFixed(2)}, lift ${flag.lift.toFixed(2)}); ` +
          `route to ${flag.recommended_group}`
      )
    );
  }
  return section;
}

export function renderDetail(hit: SearchHit): HTMLElement {
  const panel = el("aside", "detail");
  panel.appendChild(el("h2", undefined, hit.ticket.ticket_id));
  const pairs: [string, string][] = [];
  for (const field of RAW_FIELDS) {
    const value = hit.ticket[field];
    if (value !== undefined && value !== null) {
      pairs.push([String(field), String(value)]);
    }
  }
  panel.appendChild(definitionList(pairs));
  panel.appendChild(el("h4", undefined, "description"));
  panel.appendChild(markedText(hit.ticket.description, hit.insights?.oov_tokens ?? []));
  if (hit.ticket.resolution) {
    panel.appendChild(el("h4", undefined, "resolution"));
    panel.appendChild(el("p", "text", hit.ticket.resolution));
  }
  if (hit.insights) {
    panel.appendChild(insightsSection(hit.insights));
  }
  return panel;
}

// --- Top-level view ----------------------------------------------------------

export interface Handlers {
  onToggle: (field: FacetField, value: string) => void;
  onSelect: (ticketId: string) => void;
}

export function renderView(view: ExplorerView, handlers: Handlers): HTMLElement {
  const root = el("div", "explorer");
  if (view.error) {
    root.appendChild(el("div", "banner error", `API error: ${view.error}`));
  }
  if (view.response) {
    root.appendChild(
      el(
        "div",
        "hit-count",
        `${view.response.total} tickets (generation ${view.response.generation})`
      )
    );
    root.appendChild(renderFacetBars(view.state, view.response, handlers.onToggle));
    root.appendChild(renderTicketTable(view.response, handlers.onSelect));
  }
  if (view.detail) {
    root.appendChild(renderDetail(view.detail));
  }
  return root;
}
