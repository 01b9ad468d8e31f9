/**
 * Console client: handshake, control sending with acks, reconnection.
 *
 * The websocket constructor is injectable so tests can drive the client
 * against a scripted server (node `ws`) or a fake transport.
 */

import { ControlArgs, Message, PROTOCOL_VERSION, controlBody, decode, encode } from "./protocol.js";
import { ConsoleState } from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface PendingCommand {
  name: string;
  seq: number;
  sentAt: number;
  resolve: (ok: boolean) => void;
  timer: ReturnType<typeof setTimeout>;
}

export interface ClientOptions {
  ackTimeoutMs?: number;
  reconnectDelayMs?: number;
  maxReconnectDelayMs?: number;
  now?: () => number;
}

export class ConsoleClient {
  readonly state: ConsoleState;
  onchange: (() => void) | null = null;
  onerrorMessage: ((reason: string) => void) | null = null;
  /** commands awaiting an ack render as disabled-looking in the panel */
  pending = new Map<number, PendingCommand>();
  failedCommand: string | null = null; // retry affordance

  private url: string;
  private makeSocket: SocketFactory;
  private socket: SocketLike | null = null;
  private seq = 0;
  private closed = false;
  private reconnectDelay: number;
  private readonly opts: Required<ClientOptions>;

  constructor(url: string, makeSocket: SocketFactory, state?: ConsoleState,
              opts: ClientOptions = {}) {
    this.url = url;
    this.makeSocket = makeSocket;
    this.state = state ?? new ConsoleState();
    this.opts = {
      ackTimeoutMs: opts.ackTimeoutMs ?? 3000,
      reconnectDelayMs: opts.reconnectDelayMs ?? 500,
      maxReconnectDelayMs: opts.maxReconnectDelayMs ?? 10_000,
      now: opts.now ?? (() => Date.now()),
    };
    this.reconnectDelay = this.opts.reconnectDelayMs;
  }

  connect(): void {
    this.closed = false;
    this.state.status = "connecting";
    this.emitChange();
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.seq += 1;
      socket.send(encode({
        v: PROTOCOL_VERSION, seq: this.seq, tick: 0,
        kind: "control", body: { role: "console" },
      }));
    };
    socket.onmessage = (ev) => this.handleFrame(String(ev.data));
    socket.onclose = () => this.handleDrop();
    socket.onerror = () => { /* onclose follows */ };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }

  sendControl(name: string, args: ControlArgs = {}): Promise<boolean> {
    const socket = this.socket;
    if (socket == null || this.state.status !== "connected") {
      this.failedCommand = name;
      this.emitChange();
      return Promise.resolve(false);
    }
    this.seq += 1;
    const seq = this.seq;
    const msg: Message = {
      v: PROTOCOL_VERSION, seq, tick: this.state.tick,
      kind: "control", body: controlBody(name, args),
    };
    socket.send(encode(msg));
    return new Promise((resolve) => {
      const timer = setTimeout(() => {
        this.pending.delete(seq);
        this.failedCommand = name; // surface a retry affordance
        this.emitChange();
        resolve(false);
      }, this.opts.ackTimeoutMs);
      this.pending.set(seq, {
        name, seq, sentAt: this.opts.now(), resolve, timer,
      });
      this.emitChange();
    });
  }

  placeHint(x: number, y: number, player: string): Promise<boolean> {
    const shape = this.state.selectedShape;
    if (!shape) return Promise.resolve(false);
    return this.sendControl("trigger_hint", {
      shape, x, y, player, style: this.state.hintStyle,
    });
  }

  private handleFrame(raw: string): void {
    const msg = decode(raw);
    if (msg == null) return; // tolerate garbage; the server validates anyway
    switch (msg.kind) {
      case "ack": {
        const body = msg.body as { seq_ref?: number; ok?: boolean; role?: string };
        if (body.role === "console") {
          this.state.status = "connected";
          this.reconnectDelay = this.opts.reconnectDelayMs;
          break;
        }
        const entry = body.seq_ref != null ? this.pending.get(body.seq_ref) : undefined;
        if (entry) {
          clearTimeout(entry.timer);
          this.pending.delete(entry.seq);
          if (this.failedCommand === entry.name) this.failedCommand = null;
          entry.resolve(body.ok === true);
        }
        break;
      }
      case "error": {
        const body = msg.body as { reason?: string; seq_ref?: number | null };
        if (body.seq_ref != null) {
          const entry = this.pending.get(body.seq_ref);
          if (entry) {
            clearTimeout(entry.timer);
            this.pending.delete(entry.seq);
            this.failedCommand = entry.name;
            entry.resolve(false);
          }
        }
        if (String(body.reason ?? "").includes("hash")) this.state.flagDesync();
        this.onerrorMessage?.(String(body.reason ?? "unknown error"));
        break;
      }
      default:
        this.state.handle(msg);
    }
    this.emitChange();
  }

  private handleDrop(): void {
    for (const entry of this.pending.values()) {
      clearTimeout(entry.timer);
      entry.resolve(false);
    }
    this.pending.clear();
    if (this.closed) return;
    this.state.status = "dropped";
    this.emitChange();
    const delay = this.reconnectDelay;
    this.reconnectDelay = Math.min(this.reconnectDelay * 2, this.opts.maxReconnectDelayMs);
    setTimeout(() => {
      if (!this.closed) this.connect(); // rejoin: the server re-sends a snapshot
    }, delay);
  }

  private emitChange(): void {
    this.onchange?.();
  }
}
