/** Cursor frame throttling: never more than maxPerSecond sends. */

export interface CursorFrame {
  x: number;
  y: number;
}

/**
 * Leading-edge rate limiter with a trailing pending slot. offer() returns
 * the frame to send now (if the budget allows) or null; the newest refused
 * frame is retained and released by takeDue() once the interval elapses, so
 * the cursor's final resting position is never lost.
 */
export class FrameThrottle {
  private lastSentAt = -Infinity;
  private pending: CursorFrame | null = null;
  readonly intervalMs: number;

  constructor(maxPerSecond = 60) {
    if (maxPerSecond <= 0) throw new Error("maxPerSecond must be positive");
    this.intervalMs = 1000 / maxPerSecond;
  }

  offer(frame: CursorFrame, nowMs: number): CursorFrame | null {
    if (nowMs - this.lastSentAt >= this.intervalMs) {
      this.lastSentAt = nowMs;
      this.pending = null;
      return frame;
    }
    this.pending = frame;
    return null;
  }

  takeDue(nowMs: number): CursorFrame | null {
    if (this.pending !== null && nowMs - this.lastSentAt >= this.intervalMs) {
      const frame = this.pending;
      this.pending = null;
      this.lastSentAt = nowMs;
      return frame;
    }
    return null;
  }

  hasPending(): boolean {
    return this.pending !== null;
  }
}
