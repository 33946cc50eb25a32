/** Typed HTTP client for the exploration service. */

import type { AgentTurn, PlaceResponse, SessionResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Server-provided text for an error body, shown to the user verbatim. */
export function errorText(body: unknown, status: number): string {
  if (body && typeof body === "object") {
    const rec = body as Record<string, unknown>;
    if (typeof rec.text === "string") return rec.text;
    if (typeof rec.detail === "string") return rec.detail;
  }
  return `server error (HTTP ${status})`;
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  let body: unknown = null;
  const raw = await resp.text();
  try {
    body = raw ? JSON.parse(raw) : null;
  } catch {
    body = raw;
  }
  if (!resp.ok) {
    throw new ApiError(resp.status, body, errorText(body, resp.status));
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly base: string) {}

  createPlace(req: {
    query?: string;
    lat?: number;
    lon?: number;
    radius_m?: number;
    fixture?: string;
  }): Promise<PlaceResponse> {
    return request(this.base, "/places", { method: "POST", body: JSON.stringify(req) });
  }

  createSession(datasetId: string): Promise<SessionResponse> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify({ dataset_id: datasetId }),
    });
  }

  ask(sessionId: string, question: string): Promise<AgentTurn> {
    return request(this.base, `/sessions/${sessionId}/ask`, {
      method: "POST",
      body: JSON.stringify({ question }),
    });
  }

  setAudio(sessionId: string, enabled: boolean): Promise<{ passive_audio_enabled: boolean }> {
    return request(this.base, `/sessions/${sessionId}/audio`, {
      method: "POST",
      body: JSON.stringify({ enabled }),
    });
  }

  closeSession(sessionId: string): Promise<{ closed: boolean }> {
    return request(this.base, `/sessions/${sessionId}`, { method: "DELETE" });
  }

  screenshotUrl(sessionId: string): string {
    return `${this.base}/sessions/${sessionId}/screenshot`;
  }

  streamPath(sessionId: string): string {
    return `/sessions/${sessionId}/stream`;
  }
}
