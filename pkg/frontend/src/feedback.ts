/** Delivery of feedback events: vibration, audio-timbre fallback, speech.
 *
 * Device vibration is missing on most desktops, so each category's pattern
 * maps to a distinct short tone with the same cadence as a fallback. The
 * client never invents spatial content: everything spoken comes straight
 * from server events (audio_label / boundary speech) or agent turns.
 */

import type { FeedbackEvent, HapticPattern } from "./types.js";

export interface VibrationAdapter {
  vibrate(pattern: number[]): boolean;
}

export interface ToneAdapter {
  playTone(params: ToneParams): void;
}

export interface SpeechAdapter {
  speak(text: string): void;
  cancel(): void;
}

export interface ToneParams {
  frequencyHz: number;
  pulseMs: number;
  gapMs: number;
  repeats: number;
  volume: number;
}

/** Vibration API schedule [on, off, on, off, ...] covering ~windowMs. */
export function vibrationSchedule(haptic: HapticPattern, windowMs = 600): number[] {
  if (haptic.continuous) return [windowMs];
  const cycle = haptic.pulse_ms + haptic.gap_ms;
  const repeats = Math.max(1, Math.floor(windowMs / Math.max(cycle, 1)));
  const schedule: number[] = [];
  for (let i = 0; i < repeats; i++) {
    schedule.push(haptic.pulse_ms);
    if (i < repeats - 1) schedule.push(haptic.gap_ms);
  }
  return schedule;
}

// One timbre per pattern id; unknown ids hash onto a reserved band so
// distinct patterns stay audibly distinct.
const TONE_FREQUENCIES: Record<string, number> = {
  building_rapid: 880,
  park_slow: 440,
  water_soft: 220,
  area_default: 660,
  boundary_burst: 150,
  reenter_confirm: 520,
};

export function toneParams(haptic: HapticPattern, windowMs = 600): ToneParams {
  let freq = TONE_FREQUENCIES[haptic.pattern_id];
  if (freq === undefined) {
    let h = 0;
    for (const ch of haptic.pattern_id) h = (h * 31 + ch.charCodeAt(0)) % 12;
    freq = 300 + h * 25;
  }
  const schedule = vibrationSchedule(haptic, windowMs);
  return {
    frequencyHz: freq,
    pulseMs: haptic.continuous ? windowMs : haptic.pulse_ms,
    gapMs: haptic.continuous ? 0 : haptic.gap_ms,
    repeats: haptic.continuous ? 1 : Math.ceil(schedule.length / 2),
    volume: haptic.intensity,
  };
}

export interface FeedbackPlayerOptions {
  vibration?: VibrationAdapter | null;
  tone?: ToneAdapter | null;
  speech?: SpeechAdapter | null;
}

export class FeedbackPlayer {
  private vibration: VibrationAdapter | null;
  private tone: ToneAdapter | null;
  private speech: SpeechAdapter | null;

  constructor(opts: FeedbackPlayerOptions = {}) {
    this.vibration = opts.vibration ?? null;
    this.tone = opts.tone ?? null;
    this.speech = opts.speech ?? null;
  }

  /** Route one server event to the haptic and speech channels.
   *
   * zone_enter carries both the pattern and (when passive audio is on) the
   * zone name, but the dedicated audio_label frame is the speech channel;
   * speaking both would double-announce every entry.
   */
  handle(event: FeedbackEvent): void {
    switch (event.kind) {
      case "zone_enter":
        if (event.haptic) this.playHaptic(event.haptic);
        break;
      case "audio_label":
        if (event.speech_text) this.speech?.speak(event.speech_text);
        break;
      case "boundary_exit":
      case "boundary_reenter":
        if (event.haptic) this.playHaptic(event.haptic);
        if (event.speech_text) this.speech?.speak(event.speech_text);
        break;
      case "zone_exit":
        break;
    }
  }

  private playHaptic(haptic: HapticPattern): void {
    const delivered = this.vibration?.vibrate(vibrationSchedule(haptic)) ?? false;
    if (!delivered) this.tone?.playTone(toneParams(haptic));
  }
}

// == Browser adapters ==

export function browserVibration(): VibrationAdapter | null {
  if (typeof navigator === "undefined" || typeof navigator.vibrate !== "function") {
    return null;
  }
  return { vibrate: (pattern) => navigator.vibrate(pattern) };
}

export function browserSpeech(): SpeechAdapter | null {
  if (typeof speechSynthesis === "undefined") return null;
  return {
    speak: (text) => {
      // queued, not cancelled: labels wait for in-progress agent speech
      speechSynthesis.speak(new SpeechSynthesisUtterance(text));
    },
    cancel: () => speechSynthesis.cancel(),
  };
}

export function browserTone(): ToneAdapter | null {
  if (typeof AudioContext === "undefined") return null;
  let ctx: AudioContext | null = null;
  return {
    playTone: (params) => {
      ctx = ctx ?? new AudioContext();
      const t0 = ctx.currentTime;
      const cycleS = (params.pulseMs + params.gapMs) / 1000;
      for (let i = 0; i < params.repeats; i++) {
        const osc = ctx.createOscillator();
        const gain = ctx.createGain();
        osc.frequency.value = params.frequencyHz;
        gain.gain.value = 0.25 * params.volume;
        osc.connect(gain).connect(ctx.destination);
        const start = t0 + i * cycleS;
        osc.start(start);
        osc.stop(start + params.pulseMs / 1000);
      }
    },
  };
}
