// Minimal server-sent-events parser over an async byte/text stream.
//
// The engine's /events endpoint emits `event:`/`data:` frames separated by
// blank lines, plus `: heartbeat` comments while idle. This parser is
// transport-agnostic so tests can feed it plain chunk arrays.

export interface SseFrame {
  event: string;
  data: string;
}

type Chunk = Uint8Array | string;

function toText(chunk: Chunk, decoder: TextDecoder): string {
  return typeof chunk === "string" ? chunk : decoder.decode(chunk, { stream: true });
}

/** Yield complete frames from a chunked event stream; comments are dropped. */
export async function* parseSse(chunks: AsyncIterable<Chunk>): AsyncGenerator<SseFrame> {
  const decoder = new TextDecoder();
  let buffer = "";
  let eventName = "message";
  let dataLines: string[] = [];

  function* drain(upTo: string): Generator<SseFrame> {
    buffer += upTo;
    let index: number;
    while ((index = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, index).replace(/\r$/, "");
      buffer = buffer.slice(index + 1);
      if (line === "") {
        if (dataLines.length > 0) {
          yield { event: eventName, data: dataLines.join("\n") };
        }
        eventName = "message";
        dataLines = [];
      } else if (line.startsWith(":")) {
        continue;
      } else if (line.startsWith("event:")) {
        eventName = line.slice(6).trimStart();
      } else if (line.startsWith("data:")) {
        dataLines.push(line.slice(5).replace(/^ /, ""));
      }
    }
  }

  for await (const chunk of chunks) {
    yield* drain(toText(chunk, decoder));
  }
  // a final frame without a trailing blank line still counts
  yield* drain("\n");
  if (dataLines.length > 0) {
    yield { event: eventName, data: dataLines.join("\n") };
  }
}
