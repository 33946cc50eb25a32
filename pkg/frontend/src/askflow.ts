/** The ask flow: one in-flight question at a time, replies spoken aloud. */

import { ApiClient, ApiError, errorText } from "./api.js";
import type { SpeechAdapter } from "./feedback.js";
import type { ChatEntry } from "./types.js";

export class AskPendingError extends Error {
  constructor() {
    super("an ask is already pending; wait for the current answer");
    this.name = "AskPendingError";
  }
}

export class AskFlow {
  pending = false;
  readonly transcript: ChatEntry[] = [];
  onUpdate: () => void = () => {};

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly speech: SpeechAdapter | null = null,
  ) {}

  /** Send one question; rejects immediately while a previous ask is open.
   * Server 409/502 messages surface verbatim in the transcript. */
  async ask(question: string): Promise<ChatEntry> {
    if (this.pending) throw new AskPendingError();
    const trimmed = question.trim();
    if (!trimmed) throw new Error("question must be non-empty");
    this.pending = true;
    this.transcript.push({ speaker: "user", text: trimmed });
    this.onUpdate();
    try {
      const turn = await this.api.ask(this.sessionId, trimmed);
      const entry: ChatEntry = { speaker: "agent", text: turn.text, isError: turn.is_error };
      this.transcript.push(entry);
      this.speech?.speak(turn.text);
      return entry;
    } catch (err) {
      const text =
        err instanceof ApiError ? errorText(err.body, err.status) : String(err);
      const entry: ChatEntry = { speaker: "agent", text, isError: true };
      this.transcript.push(entry);
      this.speech?.speak(text);
      return entry;
    } finally {
      this.pending = false;
      this.onUpdate();
    }
  }
}

/** Long-press detection (the browser stand-in for a force-click): pointer
 * held >= thresholdMs without moving beyond the slop radius triggers. */
export class LongPress {
  private downAt: number | null = null;
  private origin: { x: number; y: number } | null = null;

  constructor(
    readonly thresholdMs = 600,
    readonly slopPx = 12,
  ) {}

  down(x: number, y: number, nowMs: number): void {
    this.downAt = nowMs;
    this.origin = { x, y };
  }

  move(x: number, y: number): void {
    if (!this.origin) return;
    const dx = x - this.origin.x;
    const dy = y - this.origin.y;
    if (dx * dx + dy * dy > this.slopPx * this.slopPx) this.cancel();
  }

  /** Returns true when the release completes a long press. */
  up(nowMs: number): boolean {
    const held = this.downAt !== null && nowMs - this.downAt >= this.thresholdMs;
    this.cancel();
    return held;
  }

  cancel(): void {
    this.downAt = null;
    this.origin = null;
  }
}
