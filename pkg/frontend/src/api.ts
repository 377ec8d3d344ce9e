import type {
  Action,
  ActionResponse,
  ApiError,
  DeckCard,
  PackSummary,
  SessionView,
} from "./types";

export class RejectedActionError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(err: ApiError) {
    super(err.message);
    this.status = err.status;
    this.code = err.code;
  }
}

async function throwRejection(res: Response): Promise<never> {
  let code = "HTTP_" + res.status;
  let message = res.statusText;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "object" && body.detail.code) {
      code = body.detail.code;
      message = body.detail.message;
    } else if (body && typeof body.detail === "string") {
      message = body.detail;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new RejectedActionError({ status: res.status, code, message });
}

/** HTTP client for one service; serializes actions so at most one is in flight. */
export class ApiClient {
  readonly baseUrl: string;
  private actionInFlight = false;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  get busy(): boolean {
    return this.actionInFlight;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.baseUrl + path);
    if (!res.ok) await throwRejection(res);
    return res.json();
  }

  async listPacks(): Promise<PackSummary[]> {
    return this.getJson("/api/packs");
  }

  async getDeck(): Promise<DeckCard[]> {
    const body = await this.getJson<{ cards: DeckCard[] }>("/api/deck");
    return body.cards;
  }

  async createSession(packId = "reference", seed = 0): Promise<{ session_id: string; view: SessionView }> {
    const res = await fetch(this.baseUrl + "/api/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pack_id: packId, seed }),
    });
    if (!res.ok) await throwRejection(res);
    return res.json();
  }

  async getSession(sessionId: string): Promise<SessionView> {
    const body = await this.getJson<{ view: SessionView }>(`/api/sessions/${sessionId}`);
    return body.view;
  }

  /**
   * Submit one action. Rejects immediately with BUSY while a previous
   * action is still unanswered, so buttons cannot double-fire.
   */
  async submitAction(sessionId: string, action: Action): Promise<ActionResponse> {
    if (this.actionInFlight) {
      throw new RejectedActionError({ status: 0, code: "BUSY", message: "an action is already in flight" });
    }
    this.actionInFlight = true;
    try {
      const res = await fetch(`${this.baseUrl}/api/sessions/${sessionId}/actions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(action),
      });
      if (!res.ok) await throwRejection(res);
      return await res.json();
    } finally {
      this.actionInFlight = false;
    }
  }
}
