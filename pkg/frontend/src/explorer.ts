/**
 * Explorer: the single controller behind the dashboard.
 *
 * Holds the current ExplorerState, a replayable history stack, the last
 * good API response and an optional error banner. Every query-affecting
 * change issues exactly one /api/search call; the server does all
 * aggregation. A newer change supersedes any in-flight response, so a
 * stale reply is never rendered.
 */

import { ApiClient } from "./api";
import type { ExplorerState, FacetField } from "./state";
import {
  defaultState,
  drillTopic,
  selectTicket,
  setDateRange,
  setPage,
  setTerms,
  toggleFacet,
} from "./state";
import type { SearchHit, SearchResponse } from "./types";

export type Change =
  | { kind: "toggle-facet"; field: FacetField; value: string }
  | { kind: "set-terms"; text: string }
  | { kind: "date-range"; from: string | null; to: string | null }
  | { kind: "drill-topic"; label: string }
  | { kind: "page"; offset: number };

export interface ExplorerView {
  state: ExplorerState;
  response: SearchResponse | null;
  detail: SearchHit | null;
  error: string | null;
}

type Listener = (view: ExplorerView) => void;

export class Explorer {
  state: ExplorerState;
  response: SearchResponse | null = null;
  detail: SearchHit | null = null;
  error: string | null = null;

  private history: ExplorerState[] = [];
  private seq = 0;
  private listeners: Listener[] = [];

  constructor(private api: ApiClient, initial?: ExplorerState) {
    this.state = initial ?? defaultState();
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  view(): ExplorerView {
    return {
      state: this.state,
      response: this.response,
      detail: this.detail,
      error: this.error,
    };
  }

  private notify(): void {
    const snapshot = this.view();
    for (const listener of this.listeners) listener(snapshot);
  }

  private reduce(state: ExplorerState, change: Change): ExplorerState {
    switch (change.kind) {
      case "toggle-facet":
        return toggleFacet(state, change.field, change.value);
      case "set-terms":
        return setTerms(state, change.text);
      case "date-range":
        return setDateRange(state, change.from, change.to);
      case "drill-topic":
        return drillTopic(state, change.label);
      case "page":
        return setPage(state, change.offset);
    }
  }

  /** Run the current state's query; exactly one API call. */
  async refresh(): Promise<void> {
    const ticket = this.seq + 1;
    this.seq = ticket;
    try {
      const response = await this.api.search(this.state);
      if (ticket !== this.seq) return; // superseded by a newer change
      this.response = response;
      this.error = null;
    } catch (err) {
      if (ticket !== this.seq) return;
      // last good view is retained; only the banner changes
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }

  /** Apply a query change: push history, update state, issue one search. */
  async apply(change: Change): Promise<void> {
    this.history.push(this.state);
    this.state = this.reduce(this.state, change);
    await this.refresh();
  }

  /** Restore the previous query from the history stack. */
  async back(): Promise<void> {
    const previous = this.history.pop();
    if (!previous) return;
    this.state = previous;
    await this.refresh();
  }

  historyDepth(): number {
    return this.history.length;
  }

  /**
   * Select a ticket for the detail panel. Uses the hit from the current
   * page when present; a stale id triggers a single point refetch.
   */
  async inspect(ticketId: string | null): Promise<void> {
    this.state = selectTicket(this.state, ticketId);
    if (ticketId === null) {
      this.detail = null;
      this.notify();
      return;
    }
    const onPage = this.response?.hits.find(
      (h) => h.ticket.ticket_id === ticketId
    );
    if (onPage) {
      this.detail = onPage;
      this.notify();
      return;
    }
    try {
      const response = await this.api.searchTicketId(ticketId);
      this.detail = response.hits[0] ?? null;
      this.error = null;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }
}
