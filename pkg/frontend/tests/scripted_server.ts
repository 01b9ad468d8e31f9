/**
 * Scripted session server for console tests.
 *
 * Speaks the real wire format over `ws` and keeps a miniature scene that it
 * mutates per control command, answering with acks and state deltas the way
 * the engine server does. Enough behavior to prove every console command
 * round-trips and moves the mirror.
 */

import { WebSocketServer, WebSocket } from "ws";
import type { Message, SceneObject } from "../src/protocol.js";
import { decode, encode } from "../src/protocol.js";

interface MiniScene {
  tick: number;
  chord: string;
  paused: boolean;
  background: [number, number, number];
  objects: Map<number, SceneObject>;
  areaFlags: boolean[];
  vibration: boolean;
  evolutionMode: string;
  bgActive: boolean;
  blobsActive: boolean;
  nextId: number;
}

export class ScriptedServer {
  wss: WebSocketServer;
  scene: MiniScene;
  seq = 0;
  receivedControls: { name: string; args: Record<string, unknown> }[] = [];
  dropAcks = false;   // simulate an unresponsive server for timeout tests
  port: number;

  constructor(port: number, seedObjects: SceneObject[] = []) {
    this.port = port;
    this.scene = {
      tick: 100,
      chord: "C",
      paused: false,
      background: [16, 16, 24],
      objects: new Map(seedObjects.map((o) => [o.id, o])),
      areaFlags: [false, false, false, false],
      vibration: true,
      evolutionMode: "interactable",
      bgActive: false,
      blobsActive: false,
      nextId: 1000,
    };
    this.wss = new WebSocketServer({ port });
    this.wss.on("connection", (socket) => this.onConnection(socket));
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      for (const client of this.wss.clients) client.terminate();
      this.wss.close(() => resolve());
    });
  }

  private msg(kind: Message["kind"], body: Record<string, unknown>): string {
    this.seq += 1;
    return encode({ v: 1, seq: this.seq, tick: this.scene.tick, kind, body });
  }

  snapshotBody(): Record<string, unknown> {
    return {
      tick: this.scene.tick,
      chord: this.scene.chord,
      paused: this.scene.paused,
      background: this.scene.background,
      players: {
        P1: { color: [220, 60, 50], instrument: "marimba", hand: "right" },
        P2: { color: [60, 90, 220], instrument: "handpan", hand: "right" },
      },
      objects: [...this.scene.objects.values()],
      crossings: [],
      area_fractions: [0.25, 0.25, 0.25, 0.25],
      area_flags: this.scene.areaFlags,
      vibration_enabled: this.scene.vibration,
      evolution_mode: this.scene.evolutionMode,
      bg_active: this.scene.bgActive,
      blobs_active: this.scene.blobsActive,
      hash: "feedfacefeedface",
    };
  }

  sendRaw(raw: string): void {
    for (const client of this.wss.clients) {
      if (client.readyState === WebSocket.OPEN) client.send(raw);
    }
  }

  sendNotification(id: number, kind: string, player: string | null,
                   payload: Record<string, unknown> = {}): void {
    this.sendRaw(this.msg("notification", { id, kind, player, payload }));
  }

  sendHashCheck(hash: string, tick = this.scene.tick): void {
    this.seq += 1;
    this.sendRaw(encode({ v: 1, seq: this.seq, tick, kind: "hash_check",
                          body: { hash } }));
  }

  private delta(changes: Partial<{ added: SceneObject[]; removed: number[];
                                   updated: SceneObject[] }>): string {
    this.scene.tick += 1;
    return this.msg("state_delta", {
      tick: this.scene.tick,
      chord: this.scene.chord,
      paused: this.scene.paused,
      background: this.scene.background,
      added: changes.added ?? [],
      removed: changes.removed ?? [],
      updated: changes.updated ?? [],
      area_fractions: [0.25, 0.25, 0.25, 0.25],
      area_flags: this.scene.areaFlags,
    });
  }

  private onConnection(socket: WebSocket): void {
    socket.on("message", (data) => {
      const msg = decode(String(data));
      if (msg == null) {
        socket.send(this.msg("error", { reason: "bad frame", seq_ref: null }));
        return;
      }
      if (msg.kind === "control" && (msg.body as { role?: string }).role === "console") {
        socket.send(this.msg("ack", { seq_ref: msg.seq, ok: true, role: "console" }));
        socket.send(this.msg("snapshot", this.snapshotBody()));
        return;
      }
      if (msg.kind !== "control") {
        socket.send(this.msg("error", { reason: "control allowed from consoles only",
                                        seq_ref: msg.seq }));
        return;
      }
      const { name, args } = msg.body as { name: string; args: Record<string, unknown> };
      this.receivedControls.push({ name, args });
      if (!this.dropAcks) {
        socket.send(this.msg("ack", { seq_ref: msg.seq, ok: true }));
      }
      const reply = this.applyCommand(name, args);
      if (reply != null && !this.dropAcks) this.sendRaw(reply);
    });
  }

  private applyCommand(name: string, args: Record<string, unknown>): string | null {
    const scene = this.scene;
    switch (name) {
      case "pause":
        scene.paused = true;
        return this.delta({});
      case "resume":
        scene.paused = false;
        return this.delta({});
      case "remove_lines": {
        const doomed = [...scene.objects.values()]
          .filter((o) => o.kind === "line").map((o) => o.id);
        for (const id of doomed) scene.objects.delete(id);
        return this.delta({ removed: doomed });
      }
      case "remove_circles": {
        const doomed = [...scene.objects.values()]
          .filter((o) => o.kind === "node").map((o) => o.id);
        for (const id of doomed) scene.objects.delete(id);
        return this.delta({ removed: doomed });
      }
      case "toggle_bg_music":
        scene.bgActive = !scene.bgActive;
        return this.delta({});
      case "set_evolution_mode":
        scene.evolutionMode = String(args.mode);
        return this.delta({});
      case "play_all_melodies": {
        const added: SceneObject[] = [];
        for (const obj of scene.objects.values()) {
          if (obj.kind === "line" && obj.silent !== true) {
            const cursor: SceneObject = {
              kind: "cursor", id: scene.nextId++, line_id: obj.id,
              player: "P1", pos: 0, gain: 1,
            };
            scene.objects.set(cursor.id, cursor);
            added.push(cursor);
          }
        }
        return this.delta({ added });
      }
      case "toggle_blobs":
        scene.blobsActive = !scene.blobsActive;
        return this.delta({});
      case "swap_players":
      case "swap_hands":
      case "tutorial_step":
        return this.delta({});
      case "set_brush_color":
        return this.delta({});
      case "set_background_color":
        scene.background = [Number(args.r), Number(args.g), Number(args.b)];
        return this.delta({});
      case "set_vibration_enabled":
        scene.vibration = args.enabled === true;
        return this.delta({});
      case "trigger_hint": {
        const x = Number(args.x);
        const y = Number(args.y);
        const hint: SceneObject = {
          kind: "hint", id: scene.nextId++, shape: String(args.shape),
          style: String(args.style),
          points: [[x - 0.05, y - 0.05], [x + 0.05, y - 0.05], [x, y + 0.05],
                   [x - 0.05, y - 0.05]],
          player: String(args.player), expires_tick: scene.tick + 900,
          color: [60, 90, 220],
        };
        scene.objects.set(hint.id, hint);
        return this.delta({ added: [hint] });
      }
      default:
        return this.msg("error", { reason: `unknown command ${name}`, seq_ref: null });
    }
  }
}

let nextPort = 8931;

export function freshPort(): number {
  nextPort += 1;
  return nextPort;
}
