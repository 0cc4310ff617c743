// Server-sent events over fetch. EventSource is absent from some of the
// runtimes this client is tested in, and fetch streaming covers the one
// SSE shape the service emits: `data:` frames separated by blank lines,
// with `:` comment lines as keep-alives.
import { FetchLike } from './api.js';

// Incremental frame parser. Feed it decoded text in arbitrary chunks;
// it returns the data payloads of every frame completed so far.
export class SseParser {
  private buffer = '';

  push(chunk: string): string[] {
    this.buffer += chunk;
    const payloads: string[] = [];
    for (;;) {
      const normalized = this.buffer.replace(/\r\n/g, '\n');
      const split = normalized.indexOf('\n\n');
      if (split < 0) {
        this.buffer = normalized;
        return payloads;
      }
      const frame = normalized.slice(0, split);
      this.buffer = normalized.slice(split + 2);
      const data = frame
        .split('\n')
        .filter((line) => line.startsWith('data:'))
        .map((line) => line.slice('data:'.length).replace(/^ /, ''))
        .join('\n');
      if (data !== '') payloads.push(data);
    }
  }
}

export interface EventStreamOptions {
  fetchImpl?: FetchLike;
  onEnd?: (error: Error | null) => void;
}

// Opens the stream and calls onData with each frame's payload. Returns
// a stop function; stopping is silent (no onEnd call).
export function openEventStream(
  url: string,
  onData: (payload: string) => void,
  options: EventStreamOptions = {},
): () => void {
  const fetchImpl = options.fetchImpl ?? ((input, init) => fetch(input, init));
  const controller = new AbortController();
  let stopped = false;

  const finish = (error: Error | null) => {
    if (!stopped && options.onEnd) options.onEnd(error);
  };

  (async () => {
    try {
      const response = await fetchImpl(url, {
        signal: controller.signal,
        headers: { accept: 'text/event-stream' },
      });
      if (!response.ok || response.body === null) {
        finish(new Error(`event stream failed: HTTP ${response.status}`));
        return;
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      const parser = new SseParser();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const payload of parser.push(decoder.decode(value, { stream: true }))) {
          if (stopped) return;
          onData(payload);
        }
      }
      finish(null);
    } catch (error) {
      if (!controller.signal.aborted) {
        finish(error instanceof Error ? error : new Error(String(error)));
      }
    }
  })();

  return () => {
    stopped = true;
    controller.abort();
  };
}
