import type { ComponentPayload, GraphPayload, SuggestPayload } from "./types";

const JSON_HEADERS = { "Content-Type": "application/json" };

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(status === 0 ? detail : `HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(path, init);
  } catch (err) {
    throw new ApiError(0, err instanceof Error ? err.message : "network failure");
  }
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      typeof (body as { detail?: unknown }).detail === "string"
        ? (body as { detail: string }).detail
        : `request failed (${response.status})`;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export const createSession = (scene: unknown, proposals: unknown) =>
  request<{ id: string }>("/v1/sessions", {
    method: "POST",
    headers: JSON_HEADERS,
    body: JSON.stringify({ scene, proposals }),
  });

export const fetchGraph = (sid: string) =>
  request<GraphPayload>(`/v1/sessions/${encodeURIComponent(sid)}/graph`);

export const fetchSuggestions = (sid: string) =>
  request<SuggestPayload>(`/v1/sessions/${encodeURIComponent(sid)}/suggest`);

export const postEvidence = (sid: string, edge: string, observed: boolean) =>
  request<ComponentPayload>(`/v1/sessions/${encodeURIComponent(sid)}/evidence`, {
    method: "POST",
    headers: JSON_HEADERS,
    body: JSON.stringify({ edge, observed }),
  });

export const retractEvidence = (sid: string, edge: string) =>
  request<ComponentPayload>(
    `/v1/sessions/${encodeURIComponent(sid)}/evidence/${encodeURIComponent(edge)}`,
    { method: "DELETE" },
  );
