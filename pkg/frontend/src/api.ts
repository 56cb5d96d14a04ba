/** Thin client for the authoring service; one in-flight event at a time. */

import type { EventPayload, View } from "./types.js";

export interface Transport {
  (path: string, init?: RequestInit): Promise<unknown>;
}

export function fetchTransport(baseUrl: string): Transport {
  return async (path, init) => {
    const response = await fetch(baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.json();
  };
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class AuthoringClient {
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    private transport: Transport,
    public sessionId: string | null = null,
  ) {}

  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task, task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  async createSession(body: Record<string, unknown>): Promise<string> {
    const doc = (await this.transport("/sessions", {
      method: "POST",
      body: JSON.stringify({ schema_version: 1, ...body }),
    })) as { session_id: string };
    this.sessionId = doc.session_id;
    return doc.session_id;
  }

  getView(): Promise<View> {
    return this.enqueue(
      () => this.transport(`/sessions/${this.sessionId}/view`) as Promise<View>,
    );
  }

  postEvent(payload: EventPayload): Promise<View> {
    return this.enqueue(
      () =>
        this.transport(`/sessions/${this.sessionId}/events`, {
          method: "POST",
          body: JSON.stringify({ schema_version: 1, payload }),
        }) as Promise<View>,
    );
  }

  exportAgent(): Promise<unknown> {
    return this.enqueue(() => this.transport(`/sessions/${this.sessionId}/agent`));
  }
}
