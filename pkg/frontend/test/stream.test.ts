import { describe, expect, it } from "vitest";

import { connectStream, defaultBackoff, type SocketLike } from "../src/stream.js";

class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  closed = false;

  close(): void {
    this.closed = true;
  }

  emit(frame: unknown): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const frames: unknown[] = [];
  const statuses: string[] = [];
  const flushes: (() => void)[] = [];
  const timers: { fn: () => void; ms: number }[] = [];
  const handle = connectStream(
    "ws://test/v1/stream",
    {
      onFrame: (f) => frames.push(f),
      onStatus: (s) => statuses.push(s),
    },
    {
      socketFactory: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
      scheduleFlush: (flush) => flushes.push(flush),
      setTimer: (fn, ms) => timers.push({ fn, ms }),
    },
  );
  return { sockets, frames, statuses, flushes, timers, handle };
}

describe("connectStream", () => {
  it("delivers frames after a scheduled flush", () => {
    const h = harness();
    h.sockets[0].onopen?.();
    h.sockets[0].emit({ step: 1 });
    expect(h.frames).toEqual([]);
    h.flushes.shift()?.();
    expect(h.frames).toEqual([{ step: 1 }]);
  });

  it("coalesces bursts: latest frame wins", () => {
    const h = harness();
    h.sockets[0].onopen?.();
    h.sockets[0].emit({ step: 1 });
    h.sockets[0].emit({ step: 2 });
    h.sockets[0].emit({ step: 3 });
    expect(h.flushes).toHaveLength(1);
    h.flushes.shift()?.();
    expect(h.frames).toEqual([{ step: 3 }]);
  });

  it("reconnects with growing backoff", () => {
    const h = harness();
    h.sockets[0].onopen?.();
    h.sockets[0].onclose?.();
    expect(h.timers[0].ms).toBe(defaultBackoff(0));
    h.timers[0].fn();
    expect(h.sockets).toHaveLength(2);
    h.sockets[1].onclose?.(); // never opened: attempt counter grows
    expect(h.timers[1].ms).toBe(defaultBackoff(1));
    expect(h.statuses).toContain("connecting");
    expect(h.statuses).toContain("closed");
  });

  it("backoff is capped", () => {
    expect(defaultBackoff(20)).toBe(5000);
  });

  it("stop() closes the socket and suppresses reconnects", () => {
    const h = harness();
    h.sockets[0].onopen?.();
    h.handle.stop();
    expect(h.sockets[0].closed).toBe(true);
    h.sockets[0].onclose?.();
    expect(h.timers).toHaveLength(0);
  });

  it("ignores unparseable messages", () => {
    const h = harness();
    h.sockets[0].onopen?.();
    h.sockets[0].onmessage?.({ data: "not json{" });
    expect(h.flushes).toHaveLength(0);
  });
});
