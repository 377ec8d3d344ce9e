import type { EventFrame } from "./types";

// Minimal slice of the WebSocket interface the feed needs; lets tests and
// the node e2e driver inject their own implementation.
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface EventFeedOptions {
  /** Called for the initial frame and after every accepted action. */
  onFrame: (frame: EventFrame) => void;
  /** Called after a reconnect so the app can re-fetch the view it may have missed. */
  onReconnect?: () => void;
  makeSocket?: SocketFactory;
  reconnectDelayMs?: number;
}

function defaultFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

/**
 * Server-push view feed with auto-reconnect.
 *
 * A dropped socket is retried until stop(); each successful reopen fires
 * onReconnect so the app refreshes state instead of resubmitting actions
 * (the view is idempotent, actions are not).
 */
export class EventFeed {
  private socket: SocketLike | null = null;
  private stopped = false;
  private everConnected = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly options: EventFeedOptions,
  ) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
    this.socket = null;
  }

  private connect(): void {
    const make = this.options.makeSocket ?? defaultFactory;
    const socket = make(this.url);
    this.socket = socket;
    socket.onopen = () => {
      if (this.everConnected) this.options.onReconnect?.();
      this.everConnected = true;
    };
    socket.onmessage = (ev) => {
      let frame: EventFrame;
      try {
        frame = JSON.parse(String(ev.data)) as EventFrame;
      } catch {
        return; // torn frame; the next push carries the full view anyway
      }
      this.options.onFrame(frame);
    };
    socket.onerror = () => {
      // the close handler does the scheduling
    };
    socket.onclose = () => {
      if (this.stopped) return;
      const delay = this.options.reconnectDelayMs ?? 1000;
      this.timer = setTimeout(() => this.connect(), delay);
    };
  }
}

export function eventsUrl(baseUrl: string, sessionId: string): string {
  const ws = baseUrl.replace(/^http/, "ws").replace(/\/$/, "");
  return `${ws}/api/sessions/${sessionId}/events`;
}
