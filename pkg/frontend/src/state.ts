/**
 * Console-side session state: the mirrored scene plus UI concerns.
 *
 * The console never mutates the scene locally; everything here is replayed
 * from snapshots and deltas the server sends. Commands only go out as
 * control messages.
 */

import type {
  DeltaBody,
  Message,
  NotificationBody,
  Rgb,
  SceneObject,
  SnapshotBody,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "dropped";

export interface NotificationEntry {
  id: number;
  tick: number;
  kind: string;
  player: string | null;
  payload: Record<string, unknown>;
  read: boolean;
}

export interface PlayerInfo {
  color: Rgb;
  instrument: string;
  hand: string;
}

export const HINT_SHAPES = ["house", "circle", "star", "wave"] as const;
export type HintShape = (typeof HINT_SHAPES)[number];

export class ConsoleState {
  status: ConnectionStatus = "connecting";
  tick = 0;
  chord = "";
  paused = false;
  background: Rgb = [0, 0, 0];
  players: Record<string, PlayerInfo> = {};
  objects = new Map<number, SceneObject>();
  crossings: SnapshotBody["crossings"] = [];
  areaFractions = [0, 0, 0, 0];
  areaFlags = [false, false, false, false];
  vibrationEnabled = true;
  evolutionMode = "interactable";
  bgActive = false;
  blobsActive = false;

  notifications: NotificationEntry[] = [];
  panelHidden = false;
  selectedShape: HintShape | null = null;
  hintStyle: "dashed" | "wavy" = "dashed";

  lastServerHash = "";
  lastHashTick = -1;
  desynced = false;
  haveSnapshot = false;

  get unreadCount(): number {
    return this.notifications.filter((n) => !n.read).length;
  }

  applySnapshot(body: SnapshotBody): void {
    this.tick = body.tick;
    this.chord = body.chord;
    this.paused = body.paused;
    this.background = body.background;
    this.players = body.players;
    this.objects = new Map(body.objects.map((o) => [o.id, o]));
    this.crossings = body.crossings ?? [];
    this.areaFractions = body.area_fractions ?? [0, 0, 0, 0];
    this.areaFlags = body.area_flags ?? [false, false, false, false];
    this.vibrationEnabled = body.vibration_enabled;
    this.evolutionMode = body.evolution_mode;
    this.bgActive = body.bg_active;
    this.blobsActive = body.blobs_active;
    this.lastServerHash = body.hash;
    this.lastHashTick = body.tick;
    this.desynced = false;
    this.haveSnapshot = true;
  }

  applyDelta(body: DeltaBody): void {
    this.tick = body.tick;
    if (body.chord !== undefined) this.chord = body.chord;
    if (body.paused !== undefined) this.paused = body.paused;
    if (body.background !== undefined) this.background = body.background;
    for (const id of body.removed ?? []) this.objects.delete(id);
    for (const obj of body.added ?? []) this.objects.set(obj.id, obj);
    for (const obj of body.updated ?? []) this.objects.set(obj.id, obj);
    if (body.area_fractions) this.areaFractions = body.area_fractions;
    if (body.area_flags) this.areaFlags = body.area_flags;
  }

  addNotification(tick: number, body: NotificationBody): void {
    // idempotent by id: re-delivery never duplicates an entry
    if (this.notifications.some((n) => n.id === body.id && n.kind === body.kind)) {
      return;
    }
    this.notifications.push({
      id: body.id,
      tick,
      kind: body.kind,
      player: body.player,
      payload: body.payload ?? {},
      read: false,
    });
  }

  /** Hiding or showing never touches read flags: the badge survives toggles. */
  togglePanel(): void {
    this.panelHidden = !this.panelHidden;
  }

  markAllRead(): void {
    for (const n of this.notifications) n.read = true;
  }

  checkHash(tick: number, hash: string): void {
    // the console cannot recompute the engine hash; what it CAN verify is
    // agreement: two hashes for the same tick that differ mean the stream
    // this console rendered from is not the stream the server attests
    if (tick === this.lastHashTick && this.lastServerHash !== "" &&
        hash !== this.lastServerHash) {
      this.desynced = true;
    }
    this.lastServerHash = hash;
    this.lastHashTick = tick;
  }

  flagDesync(): void {
    this.desynced = true;
  }

  handle(msg: Message): void {
    switch (msg.kind) {
      case "snapshot":
        this.applySnapshot(msg.body as unknown as SnapshotBody);
        break;
      case "state_delta": {
        const body = msg.body as unknown as DeltaBody;
        if (body.added || body.removed || body.updated) {
          this.applyDelta(body);
        } else if (typeof body.chord === "string") {
          this.chord = body.chord; // chord-only marker delta
        }
        break;
      }
      case "notification":
        this.addNotification(msg.tick, msg.body as unknown as NotificationBody);
        break;
      case "hash_check":
        this.checkHash(msg.tick, String(msg.body.hash ?? ""));
        break;
      default:
        break; // note_event / device_command feed meters, not state
    }
  }

  /** Objects of one kind, for rendering and tests. */
  byKind(kind: SceneObject["kind"]): SceneObject[] {
    return [...this.objects.values()].filter((o) => o.kind === kind);
  }
}
