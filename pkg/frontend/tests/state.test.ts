/** Mirrored state: snapshots, deltas, notifications, desync detection. */

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { decode } from "../src/protocol.js";
import type { DeltaBody, SnapshotBody } from "../src/protocol.js";
import { ConsoleState } from "../src/state.js";
import { buildDisplayList, pointAtArclength } from "../src/mirror.js";

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/session_fixture.json", import.meta.url), "utf-8"),
);

function loaded(): ConsoleState {
  const state = new ConsoleState();
  state.applySnapshot(fixture.snapshot as SnapshotBody);
  return state;
}

describe("snapshot + deltas", () => {
  it("loads the engine snapshot", () => {
    const state = loaded();
    expect(state.haveSnapshot).toBe(true);
    expect(state.tick).toBe(fixture.snapshot.tick);
    expect(state.objects.size).toBe(fixture.snapshot.objects.length);
    expect(state.players.P1.instrument).toBe("marimba");
    expect(state.chord).toBeTruthy();
  });

  it("applies an engine delta on top of an empty mirror", () => {
    const state = new ConsoleState();
    state.applySnapshot({ ...fixture.snapshot, objects: [] } as SnapshotBody);
    expect(state.objects.size).toBe(0);
    state.applyDelta(fixture.delta as DeltaBody);
    expect(state.objects.size).toBe(fixture.delta.added.length);
  });

  it("removes and updates by id", () => {
    const state = loaded();
    const ids = [...state.objects.keys()];
    const victim = ids[0];
    state.applyDelta({
      tick: state.tick + 1, chord: state.chord, paused: false,
      background: state.background, added: [], removed: [victim],
      updated: [], area_fractions: state.areaFractions,
      area_flags: state.areaFlags,
    });
    expect(state.objects.has(victim)).toBe(false);
  });

  it("full message stream from the engine replays cleanly", () => {
    const state = new ConsoleState();
    for (const raw of fixture.frames as string[]) {
      const msg = decode(raw)!;
      state.handle(msg);
    }
    expect(state.haveSnapshot).toBe(true);
    expect(state.objects.size).toBeGreaterThan(0);
    expect(state.desynced).toBe(false);
  });
});

describe("notifications", () => {
  it("accumulates unread while hidden, preserves count across toggles", () => {
    const state = loaded();
    state.togglePanel(); // hide
    for (let i = 1; i <= 3; i++) {
      state.addNotification(10 + i, {
        id: i, kind: "isolation", player: "P1", payload: {},
      });
    }
    expect(state.panelHidden).toBe(true);
    expect(state.unreadCount).toBe(3);
    state.togglePanel(); // show: count preserved, nothing auto-read
    expect(state.panelHidden).toBe(false);
    expect(state.unreadCount).toBe(3);
    state.togglePanel();
    expect(state.unreadCount).toBe(3);
    state.markAllRead();
    expect(state.unreadCount).toBe(0);
  });

  it("is idempotent by id", () => {
    const state = loaded();
    for (let k = 0; k < 5; k++) {
      state.addNotification(9, { id: 1, kind: "repetition", player: "P2",
                                 payload: { similarity: 0.9 } });
    }
    expect(state.notifications.length).toBe(1);
  });
});

describe("hash checks", () => {
  it("flags desync when the server attests a different hash for the same tick", () => {
    const state = loaded();
    state.checkHash(500, "aaaaaaaaaaaaaaaa");
    expect(state.desynced).toBe(false);
    state.checkHash(500, "bbbbbbbbbbbbbbbb");
    expect(state.desynced).toBe(true);
  });

  it("accepts advancing hashes", () => {
    const state = loaded();
    state.checkHash(300, "aaaaaaaaaaaaaaaa");
    state.checkHash(600, "cccccccccccccccc");
    expect(state.desynced).toBe(false);
  });
});

describe("display list", () => {
  it("renders nodes, lines, hints, and the fading stroke", () => {
    const state = loaded();
    const ops = buildDisplayList(state);
    const kinds = ops.map((o) => o.op);
    expect(kinds.filter((k) => k === "quad").length).toBe(4);
    expect(kinds).toContain("dot");
    const polys = ops.filter((o) => o.op === "polyline");
    expect(polys.some((p) => p.op === "polyline" && p.dashed)).toBe(true);  // the hint
    expect(polys.some((p) => p.op === "polyline" && !p.dashed)).toBe(true); // the line
  });

  it("tints overused areas red and hint targets green", () => {
    const state = loaded();
    state.areaFlags = [true, false, false, false];
    let quads = buildDisplayList(state).filter((o) => o.op === "quad");
    expect(quads[0]).toMatchObject({ tint: "red" });
    expect(quads[1]).toMatchObject({ tint: "none" });
    state.selectedShape = "house";
    quads = buildDisplayList(state).filter((o) => o.op === "quad");
    expect(quads[1]).toMatchObject({ tint: "green" });
    expect(quads[0]).toMatchObject({ tint: "red" }); // overuse wins
  });

  it("places cursors along their line by arclength", () => {
    const line: [number, number][] = [[0.0, 0.5], [1.0, 0.5]];
    expect(pointAtArclength(line, false, 0.25)[0]).toBeCloseTo(0.25, 9);
    expect(pointAtArclength(line, false, 0)[0]).toBeCloseTo(0, 9);
    const square: [number, number][] = [[0, 0], [1, 0], [1, 1], [0, 1]];
    const [x, y] = pointAtArclength(square, true, 2.5);
    expect(x).toBeCloseTo(0.5, 9);
    expect(y).toBeCloseTo(1.0, 9);
  });
});
