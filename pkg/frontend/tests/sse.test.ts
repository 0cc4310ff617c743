import { describe, expect, test } from 'vitest';

import { SseParser, openEventStream } from '../src/sse.js';
import { sessionViewSchema } from '../src/types.js';

describe('SseParser', () => {
  test('yields one payload per data frame', () => {
    const parser = new SseParser();
    expect(parser.push('data: {"a":1}\n\ndata: {"b":2}\n\n')).toEqual(['{"a":1}', '{"b":2}']);
  });

  test('holds partial frames across arbitrary chunk boundaries', () => {
    const parser = new SseParser();
    const whole = 'data: {"first":true}\n\n: keep-alive\n\ndata: {"second":true}\n\n';
    const payloads: string[] = [];
    for (const char of whole) payloads.push(...parser.push(char));
    expect(payloads).toEqual(['{"first":true}', '{"second":true}']);
  });

  test('ignores keep-alive comments and blank frames', () => {
    const parser = new SseParser();
    expect(parser.push(': keep-alive\n\n: keep-alive\n\n')).toEqual([]);
    expect(parser.push('data: x\n\n')).toEqual(['x']);
  });

  test('joins multi-line data fields and tolerates CRLF', () => {
    const parser = new SseParser();
    expect(parser.push('data: line one\r\ndata: line two\r\n\r\n')).toEqual([
      'line one\nline two',
    ]);
  });
});

describe('openEventStream', () => {
  function streamOf(chunks: string[]): Response {
    const encoder = new TextEncoder();
    const body = new ReadableStream<Uint8Array>({
      start(controller) {
        for (const chunk of chunks) controller.enqueue(encoder.encode(chunk));
        controller.close();
      },
    });
    return new Response(body, {
      status: 200,
      headers: { 'content-type': 'text/event-stream' },
    });
  }

  test('delivers frame payloads and reports a clean end', async () => {
    const payloads: string[] = [];
    const ended = new Promise<Error | null>((resolve) => {
      openEventStream('http://example/events', (p) => payloads.push(p), {
        fetchImpl: async () => streamOf(['data: one\n', '\ndata:', ' two\n\n: bye\n\n']),
        onEnd: resolve,
      });
    });
    expect(await ended).toBeNull();
    expect(payloads).toEqual(['one', 'two']);
  });

  test('reports HTTP failures through onEnd', async () => {
    const ended = new Promise<Error | null>((resolve) => {
      openEventStream('http://example/events', () => {}, {
        fetchImpl: async () => new Response('gone', { status: 404 }),
        onEnd: resolve,
      });
    });
    expect((await ended)?.message).toContain('404');
  });

  test('stop() silences the stream', async () => {
    const payloads: string[] = [];
    let finished = false;
    const stop = openEventStream('http://example/events', (p) => payloads.push(p), {
      fetchImpl: async () => streamOf(['data: one\n\n']),
      onEnd: () => {
        finished = true;
      },
    });
    stop();
    await new Promise((resolve) => setTimeout(resolve, 20));
    expect(payloads).toEqual([]);
    expect(finished).toBe(false);
  });
});

describe('session view schema', () => {
  test('strips keys the client does not declare, wherever they appear', () => {
    const wired = {
      session_id: 'game-0001',
      kind: 'game',
      status: 'active',
      stage_index: 0,
      stages: [],
      injected_top_level: 'should vanish',
      game: {
        game_id: 'burrito_tutorial',
        title: 'Burrito Tutorial',
        stage: 'familiarization',
        mode: 'clc',
        seq: 0,
        clock: 0,
        time_limit: 80,
        stations: [],
        fluents: [],
        cooking: {},
        ingredients: [],
        meals: [],
        legal_actions: [],
        injected_game_field: 'should vanish',
        recommendation: {
          action: 'move-chef chef a b',
          mode: 'clc',
          text: 'go',
          payload: { anything: 'should vanish' },
          injected_rec_field: 'should vanish',
        },
        last_events: [],
      },
    };
    const parsed = sessionViewSchema.parse(wired);
    const text = JSON.stringify(parsed);
    expect(text).not.toContain('injected');
    expect(text).not.toContain('payload');
    expect(parsed.game?.recommendation?.action).toBe('move-chef chef a b');
  });
});
