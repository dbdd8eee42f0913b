// Chat view model.
//
// Mirrors the server contract: the main transcript only ever shows user and
// assistant bubbles; thought/action/observation events live in a per-turn
// trace and render as collapsible gray entries only while reasoningVisible
// is on. Events may arrive out of order over the network; the trace is kept
// sorted by step so the panel always matches server step order.

import { SessionBusyError } from "./api.js";
import { Execution, TraceEvent, TurnOutcome } from "./types.js";

const VIDEO_SUFFIXES = [".mp4", ".mov", ".avi", ".mkv", ".webm"];

export interface Attachment {
  name: string;
  blob: Blob;
  kind: "image" | "video";
}

export interface Turn {
  userText: string;
  attachments: Attachment[];
  events: TraceEvent[];
  finalText: string | null;
}

export interface BubbleEntry {
  kind: "bubble";
  role: "user" | "assistant";
  text: string;
  attachments: Attachment[];
}

export interface ReasoningEntry {
  kind: "reasoning";
  step: number;
  label: string;
  body: string;
  gray: true;
  collapsed: boolean;
}

export interface NoticeEntry {
  kind: "notice";
  text: string;
}

export type TranscriptEntry = BubbleEntry | ReasoningEntry | NoticeEntry;

export interface EngineLike {
  sendMessage(sessionId: string, text: string, uploads: { name: string; blob: Blob }[]): Promise<TurnOutcome>;
  streamEvents(sessionId: string): AsyncIterable<TraceEvent>;
  getTrace?(sessionId: string): Promise<TraceEvent[]>;
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export function attachmentKind(name: string): "image" | "video" {
  const lower = name.toLowerCase();
  return VIDEO_SUFFIXES.some((s) => lower.endsWith(s)) ? "video" : "image";
}

function executionLines(detail: Record<string, unknown>): string {
  const executions = (detail.executions as Execution[] | undefined) ?? [];
  return executions
    .map((e) => `${e.expert}: ${e.request} (${e.ok ? "ok" : "failed"}, ${e.duration_ms} ms)`)
    .join("\n");
}

/**
 * Reduce a turn's events to gray entries: one per reasoning step. The
 * final_response event and the llm_call that produced the final text are
 * the assistant bubble, not reasoning.
 */
export function reasoningEntries(turn: Turn): ReasoningEntry[] {
  const entries: ReasoningEntry[] = [];
  for (const event of turn.events) {
    if (event.kind === "final_response") continue;
    if (event.kind === "llm_call" && turn.finalText !== null && event.detail.output === turn.finalText) {
      continue;
    }
    let label: string;
    let body: string;
    if (event.kind === "llm_call") {
      label = "thought / actions";
      body = String(event.detail.output ?? "");
    } else if (event.kind === "expert_batch") {
      label = "observations";
      body = executionLines(event.detail);
    } else {
      label = "recovery";
      body = String(event.detail.reason ?? "");
    }
    entries.push({ kind: "reasoning", step: event.step, label, body, gray: true, collapsed: true });
  }
  return entries;
}

export class ChatViewModel {
  readonly turns: Turn[] = [];
  pendingTurn = false;
  reasoningVisible = false;
  attachments: Attachment[] = [];
  notice: string | null = null;

  constructor(
    private readonly client: EngineLike,
    private readonly sessionId: string,
  ) {}

  /** The live turn's sorted events, or the latest completed turn's. */
  get tracePanel(): TraceEvent[] {
    const turn = this.turns[this.turns.length - 1];
    return turn === undefined ? [] : turn.events;
  }

  stageAttachment(name: string, blob: Blob): void {
    this.attachments.push({ name, blob, kind: attachmentKind(name) });
  }

  toggleReasoning(): void {
    this.reasoningVisible = !this.reasoningVisible;
  }

  /** Insert an event keeping steps strictly increasing; duplicates dropped. */
  ingestEvent(event: TraceEvent): void {
    const turn = this.turns[this.turns.length - 1];
    if (turn !== undefined) this.ingestInto(turn, event);
  }

  private ingestInto(turn: Turn, event: TraceEvent): void {
    if (turn.events.some((e) => e.step === event.step)) return;
    const at = turn.events.findIndex((e) => e.step > event.step);
    if (at < 0) turn.events.push(event);
    else turn.events.splice(at, 0, event);
  }

  /** Send one turn; resolves true when the assistant answered. */
  async sendTurn(text: string): Promise<boolean> {
    if (this.pendingTurn) {
      this.notice = "a turn is still running; wait for the answer";
      return false;
    }
    this.notice = null;
    this.pendingTurn = true;
    const turn: Turn = { userText: text, attachments: this.attachments, events: [], finalText: null };
    this.turns.push(turn);
    const uploads = this.attachments.map((a) => ({ name: a.name, blob: a.blob }));

    // The stream races the POST: subscribing before the turn starts server
    // side replays the previous turn and closes. Reconnect while the POST is
    // in flight, resetting the pass so each replay-then-live run stands
    // alone; the exported trace reconciles the panel once the POST resolves.
    let turnDone = false;
    const streaming = (async () => {
      while (!turnDone) {
        try {
          let firstOfPass = true;
          for await (const event of this.client.streamEvents(this.sessionId)) {
            if (turnDone) break;
            if (firstOfPass) {
              turn.events.length = 0;
              firstOfPass = false;
            }
            this.ingestInto(turn, event);
          }
        } catch {
          // the stream is advisory; the POST result is authoritative
        }
        if (!turnDone) await delay(50);
      }
    })();

    try {
      const outcome = await this.client.sendMessage(this.sessionId, text, uploads);
      turnDone = true;
      turn.finalText = outcome.final_text;
      this.attachments = [];
      if (this.client.getTrace !== undefined) {
        try {
          const trace = await this.client.getTrace(this.sessionId);
          if (trace.length > 0) turn.events = trace;
        } catch {
          // keep whatever the stream delivered
        }
      }
      return true;
    } catch (error) {
      turnDone = true;
      this.turns.pop();
      this.notice =
        error instanceof SessionBusyError
          ? "the session is busy; your message was kept"
          : "network error; try sending again";
      return false;
    } finally {
      this.pendingTurn = false;
      await streaming;
    }
  }

  /** Flatten turns into render order, honoring the visibility contract. */
  renderEntries(): TranscriptEntry[] {
    const entries: TranscriptEntry[] = [];
    for (const turn of this.turns) {
      entries.push({ kind: "bubble", role: "user", text: turn.userText, attachments: turn.attachments });
      if (this.reasoningVisible) {
        entries.push(...reasoningEntries(turn));
      }
      if (turn.finalText !== null) {
        entries.push({ kind: "bubble", role: "assistant", text: turn.finalText, attachments: [] });
      }
    }
    if (this.notice !== null) {
      entries.push({ kind: "notice", text: this.notice });
    }
    return entries;
  }
}
