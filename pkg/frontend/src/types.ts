/** Wire types mirroring the exploration service API. */

export type ZoneCategory = "building" | "park" | "water" | "other_area";

export interface HapticPattern {
  pattern_id: string;
  pulse_ms: number;
  gap_ms: number;
  intensity: number;
  continuous: boolean;
}

export type FeedbackKind =
  | "zone_enter"
  | "zone_exit"
  | "boundary_exit"
  | "boundary_reenter"
  | "audio_label";

export interface FeedbackEvent {
  kind: FeedbackKind;
  cursor: { x: number; y: number };
  at: number;
  zone_id: string | null;
  zone_name: string | null;
  haptic: HapticPattern | null;
  speech_text: string | null;
}

export interface PlaceResponse {
  dataset_id: string;
  center: [number, number];
  radius_m: number;
  source: string;
  zone_count: number;
}

export interface ZoneSummary {
  zone_id: string;
  name: string;
  category: ZoneCategory;
  area_m2: number;
  canvas_centroid: [number, number];
}

export interface SessionResponse {
  session_id: string;
  canvas: {
    width_px: number;
    height_px: number;
    meters_per_pixel: number;
    center: [number, number];
  };
  passive_audio_enabled: boolean;
  zones: ZoneSummary[];
}

export interface AgentTurn {
  speaker: "agent";
  text: string;
  at: number;
  is_error: boolean;
}

export interface ChatEntry {
  speaker: "user" | "agent";
  text: string;
  isError?: boolean;
}
