/**
 * Scene mirror: the four-area view of the front canvas.
 *
 * buildDisplayList is pure (and what the tests exercise); render() just
 * replays the ops onto a 2D context. Canvas y grows downward while scene y
 * grows upward, so every op stores scene coordinates and render() flips.
 */

import type { Rgb, SceneObject } from "./protocol.js";
import type { ConsoleState } from "./state.js";

export type DrawOp =
  | { op: "quad"; index: number; tint: "red" | "green" | "none" }
  | { op: "polyline"; points: [number, number][]; color: Rgb; width: number;
      dashed: boolean; alpha: number; closed: boolean; fill: Rgb | null }
  | { op: "dot"; x: number; y: number; r: number; color: Rgb; alpha: number }
  | { op: "patch"; x: number; y: number; color: Rgb };

function rgb(value: unknown, fallback: Rgb = [255, 255, 255]): Rgb {
  if (Array.isArray(value) && value.length === 3) {
    return value as Rgb;
  }
  return fallback;
}

function pts(value: unknown): [number, number][] {
  if (!Array.isArray(value)) return [];
  return (value as [number, number][]).map((p) => [p[0], p[1]]);
}

/** Point at a given arclength along a polyline (closed: wraps to start). */
export function pointAtArclength(points: [number, number][], closed: boolean,
                                 s: number): [number, number] {
  const walk = closed && points.length > 1 ? [...points, points[0]] : points;
  if (walk.length === 0) return [0, 0];
  let remaining = Math.max(0, s);
  for (let i = 1; i < walk.length; i++) {
    const [ax, ay] = walk[i - 1];
    const [bx, by] = walk[i];
    const seg = Math.hypot(bx - ax, by - ay);
    if (remaining <= seg || i === walk.length - 1) {
      const t = seg > 0 ? Math.min(1, remaining / seg) : 0;
      return [ax + (bx - ax) * t, ay + (by - ay) * t];
    }
    remaining -= seg;
  }
  return walk[walk.length - 1];
}

export function buildDisplayList(state: ConsoleState): DrawOp[] {
  const ops: DrawOp[] = [];
  for (let q = 0; q < 4; q++) {
    let tint: "red" | "green" | "none" = "none";
    if (state.areaFlags[q]) tint = "red";
    else if (state.selectedShape != null) tint = "green"; // hint targets
    ops.push({ op: "quad", index: q, tint });
  }
  for (const obj of state.objects.values()) {
    ops.push(...objectOps(obj, state));
  }
  for (const crossing of state.crossings) {
    ops.push({ op: "patch", x: crossing.x, y: crossing.y, color: crossing.color });
  }
  return ops;
}

function objectOps(obj: SceneObject, state: ConsoleState): DrawOp[] {
  switch (obj.kind) {
    case "node":
      return [{
        op: "dot", x: obj.x as number, y: obj.y as number, r: 0.012,
        color: rgb(obj.color), alpha: 1,
      }];
    case "line":
      return [{
        op: "polyline",
        points: pts(obj.points),
        color: rgb(obj.color),
        width: (obj.thickness as number) ?? 0.01,
        dashed: false,
        alpha: 1,
        closed: obj.closed === true,
        fill: obj.fill == null ? null : rgb(obj.fill),
      }];
    case "stroke":
      return [{
        op: "polyline",
        points: pts(obj.points),
        color: [255, 255, 255],
        width: 0.004,
        dashed: false,
        alpha: (obj.alpha as number) ?? 1,
        closed: false,
        fill: null,
      }];
    case "hint":
      return [{
        op: "polyline",
        points: pts(obj.points),
        color: rgb(obj.color),
        width: 0.006,
        dashed: true, // hints are dashed or wavy; both render dashed here
        alpha: 0.9,
        closed: false,
        fill: null,
      }];
    case "cursor": {
      const line = state.objects.get(obj.line_id as number);
      if (line == null || line.kind !== "line") return [];
      const [cx, cy] = pointAtArclength(
        pts(line.points), line.closed === true, (obj.pos as number) ?? 0);
      return [{ op: "dot", x: cx, y: cy, r: 0.008, color: [255, 255, 255],
                alpha: Math.max(0.3, (obj.gain as number) ?? 1) }];
    }
    default:
      return [];
  }
}

/** Scene quadrant of a canvas-relative point (0=TL 1=TR 2=BL 3=BR). */
export function quadrantAt(x: number, y: number): number {
  const col = x < 0.5 ? 0 : 1;
  const row = y >= 0.5 ? 0 : 1;
  return row * 2 + col;
}

export function render(ctx: CanvasRenderingContext2D, state: ConsoleState,
                       width: number, height: number): void {
  const [br, bg, bb] = state.background;
  ctx.fillStyle = `rgb(${br},${bg},${bb})`;
  ctx.fillRect(0, 0, width, height);
  const X = (x: number) => x * width;
  const Y = (y: number) => (1 - y) * height;
  for (const op of buildDisplayList(state)) {
    switch (op.op) {
      case "quad": {
        if (op.tint === "none") break;
        const col = op.index % 2;
        const row = Math.floor(op.index / 2);
        ctx.fillStyle = op.tint === "red"
          ? "rgba(255,60,40,0.18)" : "rgba(60,220,90,0.12)";
        ctx.fillRect(col * width / 2, row * height / 2, width / 2, height / 2);
        break;
      }
      case "polyline": {
        if (op.points.length < 2) break;
        ctx.save();
        ctx.globalAlpha = op.alpha;
        ctx.setLineDash(op.dashed ? [6, 6] : []);
        ctx.lineWidth = Math.max(1, op.width * width);
        const [r, g, b] = op.color;
        ctx.strokeStyle = `rgb(${r},${g},${b})`;
        ctx.beginPath();
        ctx.moveTo(X(op.points[0][0]), Y(op.points[0][1]));
        for (const [px, py] of op.points.slice(1)) ctx.lineTo(X(px), Y(py));
        if (op.closed) ctx.closePath();
        if (op.fill) {
          const [fr, fg, fb] = op.fill;
          ctx.fillStyle = `rgba(${fr},${fg},${fb},0.5)`;
          ctx.fill();
        }
        ctx.stroke();
        ctx.restore();
        break;
      }
      case "dot": {
        if (op.alpha <= 0) break;
        ctx.save();
        ctx.globalAlpha = op.alpha;
        const [r, g, b] = op.color;
        ctx.fillStyle = `rgb(${r},${g},${b})`;
        ctx.beginPath();
        ctx.arc(X(op.x), Y(op.y), Math.max(2, op.r * width), 0, Math.PI * 2);
        ctx.fill();
        ctx.restore();
        break;
      }
      case "patch": {
        const [r, g, b] = op.color;
        ctx.fillStyle = `rgb(${r},${g},${b})`;
        ctx.beginPath();
        ctx.arc(X(op.x), Y(op.y), 5, 0, Math.PI * 2);
        ctx.fill();
        break;
      }
    }
  }
  // grid lines separating the four mirrored areas
  ctx.strokeStyle = "rgba(255,255,255,0.25)";
  ctx.setLineDash([]);
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(width / 2, 0);
  ctx.lineTo(width / 2, height);
  ctx.moveTo(0, height / 2);
  ctx.lineTo(width, height / 2);
  ctx.stroke();
}
