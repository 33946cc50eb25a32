/** DOM assembly: map panel on the left, conversation panel on the right.
 *
 * Thin client by construction: every spoken or printed spatial fact comes
 * from a server event or agent turn; this layer only moves pixels and
 * forwards pointer positions.
 */

import { ApiClient } from "./api.js";
import { AskFlow, AskPendingError, LongPress } from "./askflow.js";
import { serverUrl, wsUrl } from "./config.js";
import {
  FeedbackPlayer,
  browserSpeech,
  browserTone,
  browserVibration,
} from "./feedback.js";
import { CursorStream } from "./stream.js";
import type { FeedbackEvent, SessionResponse } from "./types.js";

interface UiRefs {
  status: HTMLElement;
  map: HTMLElement;
  screenshot: HTMLImageElement;
  cursorDot: HTMLElement;
  lastEvent: HTMLElement;
  messages: HTMLElement;
  input: HTMLInputElement;
  askButton: HTMLButtonElement;
  audioToggle: HTMLInputElement;
  provider: HTMLElement;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export async function boot(): Promise<void> {
  const refs: UiRefs = {
    status: el("status"),
    map: el("map-panel"),
    screenshot: el("screenshot"),
    cursorDot: el("cursor-dot"),
    lastEvent: el("last-event"),
    messages: el("messages"),
    input: el("ask-input"),
    askButton: el("ask-button"),
    audioToggle: el("audio-toggle"),
    provider: el("provider-indicator"),
  };
  const base = serverUrl();
  const api = new ApiClient(base);
  refs.status.textContent = `connecting to ${base} ...`;

  let session: SessionResponse;
  try {
    const place = await api.createPlace({ fixture: "seattle_center" });
    session = await api.createSession(place.dataset_id);
  } catch (err) {
    refs.status.textContent = `cannot reach server: ${String(err)}`;
    return;
  }
  const sid = session.session_id;
  refs.screenshot.src = api.screenshotUrl(sid);
  refs.provider.textContent = "provider: server-configured";

  const speech = browserSpeech();
  const player = new FeedbackPlayer({
    vibration: browserVibration(),
    tone: browserTone(),
    speech,
  });
  const askFlow = new AskFlow(api, sid, speech);

  const stream = new CursorStream(wsUrl(base, api.streamPath(sid)));
  stream.onStatus = (status) => {
    refs.status.textContent = `session ${sid.slice(0, 8)} | stream ${status}`;
    refs.status.classList.toggle("error", status !== "open");
  };
  stream.onEvent = (event: FeedbackEvent) => {
    player.handle(event);
    if (event.kind === "zone_enter") {
      refs.lastEvent.textContent = `on ${event.zone_name ?? "?"}`;
    } else if (event.kind === "zone_exit") {
      refs.lastEvent.textContent = "over empty area";
    } else if (event.kind.startsWith("boundary")) {
      refs.lastEvent.textContent = event.speech_text ?? event.kind;
    }
  };
  await stream.connect().catch(() => {});

  // pointer -> canvas coordinates (the canvas is uniform-scale; scale by
  // the rendered image size)
  const canvas = session.canvas;
  const longPress = new LongPress(600);
  const toCanvas = (ev: PointerEvent) => {
    const rect = refs.screenshot.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * canvas.width_px;
    const y = ((ev.clientY - rect.top) / rect.height) * canvas.height_px;
    return { x, y };
  };
  refs.map.addEventListener("pointermove", (ev) => {
    const p = toCanvas(ev);
    longPress.move(ev.clientX, ev.clientY);
    stream.sendCursor(p.x, p.y);
    refs.cursorDot.style.left = `${((p.x / canvas.width_px) * 100).toFixed(2)}%`;
    refs.cursorDot.style.top = `${((p.y / canvas.height_px) * 100).toFixed(2)}%`;
  });
  refs.map.addEventListener("pointerdown", (ev) => {
    longPress.down(ev.clientX, ev.clientY, performance.now());
  });
  refs.map.addEventListener("pointerup", () => {
    if (longPress.up(performance.now())) refs.input.focus();
  });
  refs.map.addEventListener("pointerleave", () => longPress.cancel());

  // keyboard shortcut: "/" focuses the ask input
  document.addEventListener("keydown", (ev) => {
    if (ev.key === "/" && document.activeElement !== refs.input) {
      ev.preventDefault();
      refs.input.focus();
    }
  });

  const renderTranscript = () => {
    refs.messages.replaceChildren(
      ...askFlow.transcript.map((entry) => {
        const div = document.createElement("div");
        div.className = `msg ${entry.speaker}${entry.isError ? " error" : ""}`;
        div.textContent = `${entry.speaker === "user" ? "You" : "Guide"}: ${entry.text}`;
        return div;
      }),
    );
    refs.messages.scrollTop = refs.messages.scrollHeight;
    refs.askButton.disabled = askFlow.pending;
    refs.askButton.textContent = askFlow.pending ? "waiting..." : "Ask";
  };
  askFlow.onUpdate = renderTranscript;

  const submit = async () => {
    const question = refs.input.value;
    if (!question.trim()) return;
    try {
      refs.input.value = "";
      await askFlow.ask(question);
    } catch (err) {
      if (err instanceof AskPendingError) {
        refs.status.textContent = err.message;
      }
    }
    // the screenshot's star tracks the server cursor; refresh after asks
    refs.screenshot.src = `${api.screenshotUrl(sid)}?t=${Date.now()}`;
  };
  refs.askButton.addEventListener("click", () => void submit());
  refs.input.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") void submit();
  });

  // optional browser dictation where supported
  const RecognitionCtor =
    (window as unknown as Record<string, unknown>).SpeechRecognition ??
    (window as unknown as Record<string, unknown>).webkitSpeechRecognition;
  if (typeof RecognitionCtor === "function") {
    const mic = document.createElement("button");
    mic.textContent = "Speak";
    mic.addEventListener("click", () => {
      const rec = new (RecognitionCtor as new () => {
        lang: string;
        onresult: (ev: { results: ArrayLike<ArrayLike<{ transcript: string }>> }) => void;
        start(): void;
      })();
      rec.lang = "en-US";
      rec.onresult = (ev) => {
        const transcript = ev.results[0]?.[0]?.transcript;
        if (transcript) {
          refs.input.value = transcript;
          void submit();
        }
      };
      rec.start();
    });
    refs.askButton.after(mic);
  }

  refs.audioToggle.addEventListener("change", () => {
    void api.setAudio(sid, refs.audioToggle.checked);
  });

  window.addEventListener("beforeunload", () => {
    stream.close();
    void api.closeSession(sid);
  });
}
