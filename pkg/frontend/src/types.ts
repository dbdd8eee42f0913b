// Wire types mirrored from the engine's HTTP API.

export type EventKind = "llm_call" | "expert_batch" | "recovery" | "final_response";

export interface TraceEvent {
  step: number;
  kind: EventKind;
  detail: Record<string, unknown>;
}

export interface ServerMedia {
  id: string;
  kind: string;
  path: string;
  display_name: string;
}

export interface ServerMessage {
  role: "user" | "assistant_final";
  text: string;
  media: ServerMedia[];
}

export interface SessionInfo {
  session_id: string;
  turn_counter: number;
  busy: boolean;
  media: ServerMedia[];
  transcript: ServerMessage[];
}

export interface TurnOutcome {
  final_text: string;
  steps_used: number;
  media_ids: string[];
}

export interface Execution {
  expert: string;
  request: string;
  observation_digest: string;
  duration_ms: number;
  ok: boolean;
}

const KINDS: ReadonlySet<string> = new Set([
  "llm_call",
  "expert_batch",
  "recovery",
  "final_response",
]);

/** Validate one decoded SSE payload; returns null for anything malformed. */
export function asTraceEvent(value: unknown): TraceEvent | null {
  if (typeof value !== "object" || value === null) return null;
  const record = value as Record<string, unknown>;
  if (typeof record.step !== "number" || !Number.isInteger(record.step) || record.step < 1) {
    return null;
  }
  if (typeof record.kind !== "string" || !KINDS.has(record.kind)) return null;
  if (typeof record.detail !== "object" || record.detail === null) return null;
  return {
    step: record.step,
    kind: record.kind as EventKind,
    detail: record.detail as Record<string, unknown>,
  };
}
