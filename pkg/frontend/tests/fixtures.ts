/** Canned API payloads shared by the test suites. */

import type { SearchHit, SearchResponse } from "../src/types";

export function makeHit(id: string, overrides: Partial<SearchHit> = {}): SearchHit {
  return {
    ticket: {
      ticket_id: id,
      ticket_type: "incident",
      created_at: "2025-01-01T09:00:00+00:00",
      priority: 2,
      category: "network",
      assignment_group: "network-team",
      description: "VPN tunnel drops for user on SRV_VPN_01",
      source_system: "synthetic",
      resolution: "Restarted the tunnel service.",
      ...overrides.ticket,
    },
    insights: overrides.insights !== undefined ? overrides.insights : {
      ticket_id: id,
      language: "english",
      translated_description: null,
      translated_resolution: null,
      entities: [
        { surface: "SRV_VPN_01", label: "device", start: 26, end: 36, source: "rule" },
      ],
      relations: [
        { subject: "SRV_VPN_01", action: "drops", object: "VPN", sentence: "..." },
      ],
      description_topic: "vpn issue",
      resolution_topic: null,
      summary: {
        sentences: ["VPN tunnel drops for user on SRV_VPN_01"],
        np_keywords: ["tunnel"],
        np_vp_keywords: ["tunnel", "drops"],
      },
      sentiment: { label: "negative", score: -1.0 },
      oov_tokens: ["srv_vpn_01"],
      propagation_flags: [
        {
          consequent: "mailbox outlook",
          confidence: 0.32,
          lift: 1.3,
          recommended_group: "messaging-team",
        },
      ],
    },
  };
}

export function makeResponse(hits: SearchHit[], total?: number): SearchResponse {
  return {
    schema_version: 1,
    generation: 1,
    total: total ?? hits.length,
    latency_ms: 0.5,
    facets: {
      ticket_type: { incident: hits.length },
      sentiment: { negative: 1, neutral: hits.length - 1 },
    },
    hits,
  };
}

interface FetchCall {
  url: string;
}

/**
 * Deterministic fetch stub: the response body is a pure function of the
 * requested URL, so a replayed request always matches the original.
 */
export function makeFetchStub(
  body: (url: string) => { status: number; payload: unknown }
) {
  const calls: FetchCall[] = [];
  const fetchFn = async (url: string) => {
    calls.push({ url });
    const { status, payload } = body(url);
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => JSON.parse(JSON.stringify(payload)),
    };
  };
  return { fetchFn, calls };
}
