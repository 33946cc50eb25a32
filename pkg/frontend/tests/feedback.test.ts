import { describe, expect, it } from "vitest";

import {
  FeedbackPlayer,
  toneParams,
  vibrationSchedule,
} from "../src/feedback.js";
import type { FeedbackEvent, HapticPattern } from "../src/types.js";

const BUILDING: HapticPattern = {
  pattern_id: "building_rapid", pulse_ms: 30, gap_ms: 50, intensity: 0.9, continuous: false,
};
const PARK: HapticPattern = {
  pattern_id: "park_slow", pulse_ms: 40, gap_ms: 150, intensity: 0.7, continuous: false,
};
const WATER: HapticPattern = {
  pattern_id: "water_soft", pulse_ms: 0, gap_ms: 0, intensity: 0.3, continuous: true,
};

function event(kind: FeedbackEvent["kind"], extra: Partial<FeedbackEvent> = {}): FeedbackEvent {
  return {
    kind,
    cursor: { x: 0, y: 0 },
    at: 0,
    zone_id: null,
    zone_name: null,
    haptic: null,
    speech_text: null,
    ...extra,
  };
}

describe("vibrationSchedule", () => {
  it("alternates pulse and gap and fits the window", () => {
    const schedule = vibrationSchedule(BUILDING, 600);
    expect(schedule.length % 2).toBe(1); // ends on a pulse
    for (let i = 0; i < schedule.length; i++) {
      expect(schedule[i]).toBe(i % 2 === 0 ? 30 : 50);
    }
    const total = schedule.reduce((a, b) => a + b, 0);
    expect(total).toBeLessThanOrEqual(600);
  });

  it("building cadence is denser than park cadence", () => {
    expect(vibrationSchedule(BUILDING).length).toBeGreaterThan(vibrationSchedule(PARK).length);
  });

  it("continuous water pattern is one long buzz", () => {
    expect(vibrationSchedule(WATER, 600)).toEqual([600]);
  });
});

describe("toneParams", () => {
  it("gives the three categories distinct timbres and cadences", () => {
    const tones = [BUILDING, PARK, WATER].map((h) => toneParams(h));
    const freqs = new Set(tones.map((t) => t.frequencyHz));
    expect(freqs.size).toBe(3);
    expect(tones[2]!.volume).toBeLessThan(tones[0]!.volume); // water is softer
  });

  it("hashes unknown pattern ids onto a stable audible band", () => {
    const odd: HapticPattern = { ...BUILDING, pattern_id: "custom_zap" };
    const a = toneParams(odd);
    const b = toneParams(odd);
    expect(a.frequencyHz).toBe(b.frequencyHz);
    expect(a.frequencyHz).toBeGreaterThanOrEqual(300);
  });
});

describe("FeedbackPlayer", () => {
  function fakes() {
    const vibrated: number[][] = [];
    const toned: number[] = [];
    const spoken: string[] = [];
    return {
      vibrated, toned, spoken,
      vibration: { vibrate: (p: number[]) => { vibrated.push(p); return true; } },
      tone: { playTone: (p: { frequencyHz: number }) => { toned.push(p.frequencyHz); } },
      speech: { speak: (t: string) => { spoken.push(t); }, cancel: () => {} },
    };
  }

  it("zone_enter vibrates; the dedicated audio_label frame speaks", () => {
    const f = fakes();
    const player = new FeedbackPlayer(f);
    player.handle(event("zone_enter", { haptic: BUILDING, speech_text: "Space Needle" }));
    player.handle(event("audio_label", { speech_text: "Space Needle" }));
    expect(f.vibrated).toHaveLength(1);
    expect(f.spoken).toEqual(["Space Needle"]); // spoken once, not twice
  });

  it("falls back to tones when vibration is unavailable", () => {
    const f = fakes();
    const player = new FeedbackPlayer({ vibration: null, tone: f.tone, speech: f.speech });
    player.handle(event("zone_enter", { haptic: PARK }));
    expect(f.toned).toEqual([440]);
  });

  it("boundary events buzz and speak the guidance verbatim", () => {
    const f = fakes();
    const player = new FeedbackPlayer(f);
    const burst: HapticPattern = {
      pattern_id: "boundary_burst", pulse_ms: 120, gap_ms: 0, intensity: 1, continuous: false,
    };
    player.handle(event("boundary_exit", {
      haptic: burst, speech_text: "move left to return to the map zone",
    }));
    expect(f.vibrated).toHaveLength(1);
    expect(f.spoken).toEqual(["move left to return to the map zone"]);
  });

  it("zone_exit is silent", () => {
    const f = fakes();
    new FeedbackPlayer(f).handle(event("zone_exit", { zone_name: "Space Needle" }));
    expect(f.vibrated).toHaveLength(0);
    expect(f.spoken).toHaveLength(0);
  });
});
