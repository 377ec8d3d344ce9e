import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { EventFeed, eventsUrl } from "../src/ws";
import type { SocketLike } from "../src/ws";
import { baseView } from "./fixtures";

class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  push(frame: unknown): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }

  drop(): void {
    this.onclose?.();
  }
}

describe("eventsUrl", () => {
  it("rewrites the scheme and appends the session path", () => {
    expect(eventsUrl("http://h:9", "sid")).toBe("ws://h:9/api/sessions/sid/events");
    expect(eventsUrl("https://h", "sid")).toBe("wss://h/api/sessions/sid/events");
  });
});

describe("EventFeed", () => {
  let sockets: FakeSocket[];
  let frames: unknown[];
  let reconnects: number;
  let feed: EventFeed;

  beforeEach(() => {
    vi.useFakeTimers();
    sockets = [];
    frames = [];
    reconnects = 0;
    feed = new EventFeed("ws://h/api/sessions/s/events", {
      onFrame: (f) => frames.push(f),
      onReconnect: () => { reconnects += 1; },
      makeSocket: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
      reconnectDelayMs: 50,
    });
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("delivers parsed frames", () => {
    feed.start();
    sockets[0].open();
    sockets[0].push({ view: baseView(), dialogue: null });
    expect(frames).toHaveLength(1);
    expect(reconnects).toBe(0);
  });

  it("reconnects after a drop and reports it", () => {
    feed.start();
    sockets[0].open();
    sockets[0].drop();
    expect(sockets).toHaveLength(1);
    vi.advanceTimersByTime(50);
    expect(sockets).toHaveLength(2);
    sockets[1].open();
    expect(reconnects).toBe(1);
    sockets[1].push({ view: baseView(), dialogue: null });
    expect(frames).toHaveLength(1);
  });

  it("stop() closes the socket and stops reconnecting", () => {
    feed.start();
    sockets[0].open();
    feed.stop();
    expect(sockets[0].closed).toBe(true);
    sockets[0].drop();
    vi.advanceTimersByTime(500);
    expect(sockets).toHaveLength(1);
  });

  it("ignores unparsable frames instead of dying", () => {
    feed.start();
    sockets[0].open();
    sockets[0].onmessage?.({ data: "{nope" });
    sockets[0].push({ view: baseView(), dialogue: null });
    expect(frames).toHaveLength(1);
  });
});
