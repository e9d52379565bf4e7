import {
  ApiError,
  createSession,
  fetchGraph,
  fetchSuggestions,
  postEvidence,
  retractEvidence,
} from "./api";
import type { GraphPayload, SuggestPayload } from "./types";

export const POLL_INTERVAL_MS = 1000;
export const TOAST_TTL_MS = 5000;
const MAX_TOASTS = 4;

export type Toast = { id: number; message: string; at: number };

// Client state is a cache of the latest successful server responses.
// Failures keep the last-good payloads on screen and surface a toast;
// nothing is ever synthesized locally.
export class AppStore {
  sessionId: string | null = null;
  graph: GraphPayload | null = null;
  suggest: SuggestPayload | null = null;
  selectedEdge: string | null = null;
  toasts: Toast[] = [];

  private pollInFlight = false;
  private timer: ReturnType<typeof setInterval> | null = null;
  private toastSerial = 0;
  private readonly now: () => number;

  constructor(
    private readonly onChange: () => void,
    now: () => number = () => Date.now(),
  ) {
    this.now = now;
  }

  async start(scene: unknown, proposals: unknown): Promise<string> {
    const { id } = await createSession(scene, proposals);
    await this.attach(id);
    return id;
  }

  async attach(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    await this.refresh();
    this.startPolling();
  }

  startPolling(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => void this.poll(), POLL_INTERVAL_MS);
  }

  stopPolling(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  // Poll ticks skip while an earlier request is still in flight so a
  // slow server never stacks requests.
  async poll(): Promise<void> {
    if (this.pollInFlight) return;
    this.pollInFlight = true;
    try {
      await this.refresh();
    } finally {
      this.pollInFlight = false;
    }
  }

  async refresh(): Promise<void> {
    if (this.sessionId === null) return;
    try {
      const [graph, suggest] = await Promise.all([
        fetchGraph(this.sessionId),
        fetchSuggestions(this.sessionId),
      ]);
      this.graph = graph;
      this.suggest = suggest;
    } catch (err) {
      this.pushToast(describe(err));
    }
    this.expireToasts();
    this.onChange();
  }

  async verify(edge: string, observed: boolean): Promise<void> {
    if (this.sessionId === null) return;
    try {
      await postEvidence(this.sessionId, edge, observed);
    } catch (err) {
      this.pushToast(describe(err));
    }
    await this.refresh();
  }

  async retract(edge: string): Promise<void> {
    if (this.sessionId === null) return;
    try {
      await retractEvidence(this.sessionId, edge);
    } catch (err) {
      this.pushToast(describe(err));
    }
    await this.refresh();
  }

  select(edge: string | null): void {
    this.selectedEdge = edge;
    this.onChange();
  }

  pushToast(message: string): void {
    this.toasts.push({ id: this.toastSerial++, message, at: this.now() });
    if (this.toasts.length > MAX_TOASTS) this.toasts.shift();
    this.onChange();
  }

  expireToasts(): void {
    const cutoff = this.now() - TOAST_TTL_MS;
    this.toasts = this.toasts.filter((t) => t.at > cutoff);
  }
}

const describe = (err: unknown): string => {
  if (err instanceof ApiError) return err.detail;
  return err instanceof Error ? err.message : "request failed";
};
