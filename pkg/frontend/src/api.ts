/**
 * Thin client for the engine's HTTP JSON API.
 * One method call is exactly one HTTP request; no caching, no retries.
 */

import type { ExplorerState } from "./state";
import { toSearchParams } from "./state";
import type { ErrorResponse, SearchResponse, TopicsResponse } from "./types";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url) => fetch(url)
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    const body = (await response.json()) as T | ErrorResponse;
    if (!response.ok) {
      const message =
        typeof body === "object" && body !== null && "error" in body
          ? (body as ErrorResponse).error
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  search(state: ExplorerState): Promise<SearchResponse> {
    return this.get<SearchResponse>(`/api/search?${toSearchParams(state)}`);
  }

  /** Point lookup used by the detail panel when an id leaves the page. */
  searchTicketId(ticketId: string): Promise<SearchResponse> {
    const params = new URLSearchParams({ q: ticketId, limit: "1" });
    return this.get<SearchResponse>(`/api/search?${params}`);
  }

  topics(): Promise<TopicsResponse> {
    return this.get<TopicsResponse>("/api/topics");
  }
}
