/**
 * Wire protocol: UTF-8 JSON, one message per websocket text frame.
 * Mirrors the engine's schema; decode is total and returns null on garbage.
 */

export const PROTOCOL_VERSION = 1;

export type MessageKind =
  | "input"
  | "state_delta"
  | "snapshot"
  | "notification"
  | "device_command"
  | "control"
  | "note_event"
  | "hash_check"
  | "ack"
  | "error";

const KINDS: ReadonlySet<string> = new Set([
  "input", "state_delta", "snapshot", "notification", "device_command",
  "control", "note_event", "hash_check", "ack", "error",
]);

export interface Message {
  v: number;
  seq: number;
  tick: number;
  kind: MessageKind;
  body: Record<string, unknown>;
}

export type Rgb = [number, number, number];

export interface SceneObject {
  kind: "node" | "line" | "stroke" | "hint" | "cursor";
  id: number;
  [field: string]: unknown;
}

export interface SnapshotBody {
  tick: number;
  chord: string;
  paused: boolean;
  background: Rgb;
  players: Record<string, { color: Rgb; instrument: string; hand: string }>;
  objects: SceneObject[];
  crossings: { line_a: number; line_b: number; x: number; y: number; color: Rgb }[];
  area_fractions: number[];
  area_flags: boolean[];
  vibration_enabled: boolean;
  evolution_mode: string;
  bg_active: boolean;
  blobs_active: boolean;
  hash: string;
}

export interface DeltaBody {
  tick: number;
  chord: string;
  paused: boolean;
  background: Rgb;
  added: SceneObject[];
  removed: number[];
  updated: SceneObject[];
  area_fractions: number[];
  area_flags: boolean[];
}

export interface NotificationBody {
  id: number;
  kind: string;
  player: string | null;
  payload: Record<string, unknown>;
}

export function encode(msg: Message): string {
  return JSON.stringify(msg);
}

export function decode(raw: string): Message | null {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    return null;
  }
  const rec = parsed as Record<string, unknown>;
  if (
    typeof rec.v !== "number" ||
    typeof rec.seq !== "number" ||
    typeof rec.tick !== "number" ||
    typeof rec.kind !== "string" ||
    !KINDS.has(rec.kind)
  ) {
    return null;
  }
  const body = rec.body;
  if (typeof body !== "object" || body === null || Array.isArray(body)) {
    return null;
  }
  return {
    v: rec.v,
    seq: rec.seq,
    tick: rec.tick,
    kind: rec.kind as MessageKind,
    body: body as Record<string, unknown>,
  };
}

/** Control command payloads: one per left-panel button. */
export interface ControlArgs {
  [key: string]: string | number | boolean;
}

export function controlBody(name: string, args: ControlArgs = {}): Record<string, unknown> {
  return { name, args };
}
