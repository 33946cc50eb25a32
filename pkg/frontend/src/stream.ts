/** WebSocket cursor streaming with reconnect and frame throttling. */

import { FrameThrottle } from "./throttle.js";
import type { FeedbackEvent } from "./types.js";

/** The subset of the WebSocket API the stream needs; lets tests and node
 * clients inject an implementation (browsers use globalThis.WebSocket). */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type StreamStatus = "connecting" | "open" | "reconnecting" | "closed";

export interface CursorStreamOptions {
  socketFactory?: SocketFactory;
  maxFramesPerSecond?: number;
  maxReconnectAttempts?: number;
  reconnectBaseDelayMs?: number;
  now?: () => number;
  setTimer?: (fn: () => void, ms: number) => unknown;
}

function defaultSocketFactory(url: string): SocketLike {
  const Ctor = (globalThis as { WebSocket?: new (url: string) => SocketLike }).WebSocket;
  if (!Ctor) throw new Error("no WebSocket implementation available");
  return new Ctor(url);
}

export class CursorStream {
  private socket: SocketLike | null = null;
  private throttle: FrameThrottle;
  private attempts = 0;
  private closedByUser = false;
  private flushTimerArmed = false;
  status: StreamStatus = "connecting";

  onEvent: (event: FeedbackEvent) => void = () => {};
  onStatus: (status: StreamStatus) => void = () => {};

  private readonly factory: SocketFactory;
  private readonly maxAttempts: number;
  private readonly baseDelayMs: number;
  private readonly now: () => number;
  private readonly setTimer: (fn: () => void, ms: number) => unknown;

  constructor(
    readonly url: string,
    opts: CursorStreamOptions = {},
  ) {
    this.factory = opts.socketFactory ?? defaultSocketFactory;
    this.throttle = new FrameThrottle(opts.maxFramesPerSecond ?? 60);
    this.maxAttempts = opts.maxReconnectAttempts ?? 5;
    this.baseDelayMs = opts.reconnectBaseDelayMs ?? 500;
    this.now = opts.now ?? (() => Date.now());
    this.setTimer = opts.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
  }

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      this.setStatus(this.attempts ? "reconnecting" : "connecting");
      let settled = false;
      const socket = this.factory(this.url);
      this.socket = socket;
      socket.onopen = () => {
        this.attempts = 0;
        this.setStatus("open");
        settled = true;
        resolve();
      };
      socket.onmessage = (ev) => {
        try {
          const parsed = JSON.parse(String(ev.data));
          if (parsed && typeof parsed === "object" && "kind" in parsed) {
            this.onEvent(parsed as FeedbackEvent);
          }
        } catch {
          // non-JSON frames are ignored
        }
      };
      socket.onerror = () => {
        if (!settled) {
          settled = true;
          reject(new Error(`websocket connect failed: ${this.url}`));
        }
      };
      socket.onclose = () => {
        this.socket = null;
        if (this.closedByUser) {
          this.setStatus("closed");
          return;
        }
        this.attempts += 1;
        if (this.attempts > this.maxAttempts) {
          this.setStatus("closed");
          return;
        }
        const delay = this.baseDelayMs * 2 ** (this.attempts - 1);
        this.setStatus("reconnecting");
        this.setTimer(() => {
          if (!this.closedByUser) this.connect().catch(() => {});
        }, delay);
      };
    });
  }

  /** Throttled cursor send; drops to <= maxFramesPerSecond, keeps the
   * newest refused frame and flushes it when the budget reopens. */
  sendCursor(x: number, y: number): boolean {
    const frame = this.throttle.offer({ x, y }, this.now());
    if (frame) {
      this.sendNow(frame.x, frame.y);
      return true;
    }
    this.armFlush();
    return false;
  }

  private armFlush(): void {
    if (this.flushTimerArmed) return;
    this.flushTimerArmed = true;
    this.setTimer(() => {
      this.flushTimerArmed = false;
      const due = this.throttle.takeDue(this.now());
      if (due) this.sendNow(due.x, due.y);
      else if (this.throttle.hasPending()) this.armFlush();
    }, this.throttle.intervalMs);
  }

  private sendNow(x: number, y: number): void {
    if (this.socket && this.status === "open") {
      this.socket.send(JSON.stringify({ x, y }));
    }
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
    this.setStatus("closed");
  }

  private setStatus(status: StreamStatus): void {
    this.status = status;
    this.onStatus(status);
  }
}
