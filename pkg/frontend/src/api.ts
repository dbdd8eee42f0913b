// Thin client for the engine's HTTP API.

import { parseSse } from "./sse.js";
import { asTraceEvent, SessionInfo, TraceEvent, TurnOutcome } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SessionBusyError extends Error {
  constructor() {
    super("a turn is already running in this session");
  }
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export interface Upload {
  name: string;
  blob: Blob;
}

async function expectOk(response: Response): Promise<Response> {
  if (response.status === 409) throw new SessionBusyError();
  if (!response.ok) {
    throw new ApiError(response.status, `server returned ${response.status}`);
  }
  return response;
}

async function* readChunks(body: ReadableStream<Uint8Array>): AsyncGenerator<Uint8Array> {
  const reader = body.getReader();
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      yield value;
    }
  } finally {
    reader.releaseLock();
  }
}

export class EngineClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async createSession(): Promise<string> {
    const response = await expectOk(
      await this.fetchImpl(`${this.baseUrl}/v1/sessions`, { method: "POST" }),
    );
    const body = (await response.json()) as { session_id: string };
    return body.session_id;
  }

  async getSession(sessionId: string): Promise<SessionInfo> {
    const response = await expectOk(
      await this.fetchImpl(`${this.baseUrl}/v1/sessions/${sessionId}`),
    );
    return (await response.json()) as SessionInfo;
  }

  async sendMessage(sessionId: string, text: string, uploads: Upload[]): Promise<TurnOutcome> {
    const form = new FormData();
    form.append("text", text);
    for (const upload of uploads) {
      form.append("attachments", upload.blob, upload.name);
    }
    const response = await expectOk(
      await this.fetchImpl(`${this.baseUrl}/v1/sessions/${sessionId}/messages`, {
        method: "POST",
        body: form,
      }),
    );
    return (await response.json()) as TurnOutcome;
  }

  /** Stream the current turn's trace events; ends after final_response. */
  async *streamEvents(sessionId: string): AsyncGenerator<TraceEvent> {
    const response = await expectOk(
      await this.fetchImpl(`${this.baseUrl}/v1/sessions/${sessionId}/events`),
    );
    if (response.body === null) return;
    for await (const frame of parseSse(readChunks(response.body))) {
      const event = asTraceEvent(JSON.parse(frame.data));
      if (event !== null) yield event;
    }
  }

  /** The latest turn's full trace (JSON lines), authoritative after a turn. */
  async getTrace(sessionId: string): Promise<TraceEvent[]> {
    const response = await expectOk(
      await this.fetchImpl(`${this.baseUrl}/v1/sessions/${sessionId}/trace`),
    );
    const events: TraceEvent[] = [];
    for (const line of (await response.text()).split("\n")) {
      if (line.trim() === "") continue;
      const event = asTraceEvent(JSON.parse(line));
      if (event !== null) events.push(event);
    }
    return events;
  }
}
