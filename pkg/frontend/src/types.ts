/**
 * Shapes of the JSON API payloads the dashboard consumes.
 * Mirrors the server responses; the browser never recomputes aggregates.
 */

export interface TicketPayload {
  ticket_id: string;
  ticket_type: string;
  created_at: string;
  priority: number;
  category: string;
  assignment_group: string;
  description: string;
  source_system: string;
  resolved_at?: string;
  subcategory?: string;
  agent_id?: string;
  sla_target_minutes?: number;
  resolution?: string;
  device_id?: string;
  related_change_id?: string;
  csat_score?: number;
  csat_comment?: string;
  [extra: string]: unknown;
}

export interface EntityPayload {
  surface: string;
  label: string;
  start: number;
  end: number;
  source: string;
}

export interface RelationPayload {
  subject: string;
  action: string | null;
  object: string;
  sentence: string;
}

export interface SummaryPayload {
  sentences: string[];
  np_keywords: string[];
  np_vp_keywords: string[];
}

export interface SentimentPayload {
  label: string;
  score: number;
}

export interface InsightsPayload {
  ticket_id: string;
  language: string;
  translated_description: string | null;
  translated_resolution: string | null;
  entities: EntityPayload[];
  relations: RelationPayload[];
  description_topic: string | null;
  resolution_topic: string | null;
  summary: SummaryPayload | null;
  sentiment: SentimentPayload | null;
  oov_tokens: string[];
  propagation_flags: PropagationFlag[];
}

export interface PropagationFlag {
  consequent: string;
  confidence: number;
  lift: number;
  recommended_group: string;
  [extra: string]: unknown;
}

export interface SearchHit {
  ticket: TicketPayload;
  insights: InsightsPayload | null;
}

export interface SearchResponse {
  schema_version: number;
  generation: number;
  total: number;
  latency_ms: number;
  facets: Record<string, Record<string, number>>;
  hits: SearchHit[];
}

export interface TopicsResponse {
  schema_version: number;
  topics: { label: string; tickets: number; [extra: string]: unknown }[];
}

export interface ErrorResponse {
  schema_version: number;
  error: string;
}
