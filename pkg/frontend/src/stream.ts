// WebSocket frame feed with reconnect and coalescing. Frames may arrive
// faster than the UI paints; only the newest unrendered frame is handed on.

export interface StreamHandlers {
  onFrame: (frame: unknown) => void;
  onStatus: (status: "connecting" | "live" | "closed") => void;
}

export interface SocketLike {
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  close(): void;
}

export interface StreamOptions {
  socketFactory?: (url: string) => SocketLike;
  scheduleFlush?: (flush: () => void) => void;
  reconnectDelayMs?: (attempt: number) => number;
  setTimer?: (fn: () => void, ms: number) => unknown;
}

export const defaultBackoff = (attempt: number): number =>
  Math.min(500 * 2 ** attempt, 5000);

export interface StreamHandle {
  stop: () => void;
  attempts: () => number;
}

export function connectStream(
  url: string,
  handlers: StreamHandlers,
  options: StreamOptions = {},
): StreamHandle {
  const factory =
    options.socketFactory ??
    ((u: string) => new WebSocket(u) as unknown as SocketLike);
  const schedule =
    options.scheduleFlush ??
    ((flush: () => void) => requestAnimationFrame(() => flush()));
  const backoff = options.reconnectDelayMs ?? defaultBackoff;
  const setTimer = options.setTimer ?? ((fn: () => void, ms: number) => setTimeout(fn, ms));

  let stopped = false;
  let attempt = 0;
  let pending: unknown = null;
  let flushScheduled = false;

  const flush = () => {
    flushScheduled = false;
    if (pending !== null && !stopped) {
      const frame = pending;
      pending = null;
      handlers.onFrame(frame);
    }
  };

  let socket: SocketLike | null = null;

  const open = () => {
    if (stopped) {
      return;
    }
    handlers.onStatus("connecting");
    socket = factory(url);
    socket.onopen = () => {
      attempt = 0;
      handlers.onStatus("live");
    };
    socket.onmessage = (ev) => {
      try {
        pending = JSON.parse(ev.data); // latest wins under backpressure
      } catch {
        return;
      }
      if (!flushScheduled) {
        flushScheduled = true;
        schedule(flush);
      }
    };
    socket.onclose = () => {
      handlers.onStatus("closed");
      if (!stopped) {
        const delay = backoff(attempt);
        attempt += 1;
        setTimer(open, delay);
      }
    };
  };

  open();
  return {
    stop: () => {
      stopped = true;
      socket?.close();
    },
    attempts: () => attempt,
  };
}
