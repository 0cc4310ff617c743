// Thin typed client for the study service. Every response body is
// validated through the zod schemas before it is returned, so callers
// only ever see well-formed views.
import {
  CatalogGame,
  SessionView,
  catalogGameSchema,
  sessionViewSchema,
} from './types.js';
import { z } from 'zod';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface CreateSessionRequest {
  kind: 'game' | 'preference';
  condition?: string;
  seed?: number;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText || `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body.detail === 'string') detail = body.detail;
      } catch {
        // Non-JSON error body; the status line is all we have.
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  private async requestJson(path: string, init?: RequestInit): Promise<unknown> {
    return (await this.request(path, init)).json();
  }

  private post(path: string, body: unknown): Promise<unknown> {
    return this.requestJson(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  async listGames(): Promise<CatalogGame[]> {
    return z.array(catalogGameSchema).parse(await this.requestJson('/games'));
  }

  async listConditions(): Promise<string[]> {
    return z.array(z.string()).parse(await this.requestJson('/conditions'));
  }

  async createSession(body: CreateSessionRequest): Promise<SessionView> {
    return sessionViewSchema.parse(await this.post('/sessions', body));
  }

  async getView(sessionId: string): Promise<SessionView> {
    return sessionViewSchema.parse(await this.requestJson(`/sessions/${sessionId}`));
  }

  async submitAction(sessionId: string, seq: number, action: string): Promise<SessionView> {
    return sessionViewSchema.parse(
      await this.post(`/sessions/${sessionId}/actions`, { seq, action }),
    );
  }

  async submitVote(
    sessionId: string,
    seq: number,
    clipId: string,
    mode: string,
  ): Promise<SessionView> {
    return sessionViewSchema.parse(
      await this.post(`/sessions/${sessionId}/votes`, { seq, clip_id: clipId, mode }),
    );
  }

  async exportLog(sessionId: string): Promise<string> {
    return (await this.request(`/sessions/${sessionId}/log`)).text();
  }

  logUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/log`;
  }

  eventsUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/events`;
  }
}
