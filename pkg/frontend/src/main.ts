/** Browser bootstrap: connect to the session server and wire the three panels. */

import { ConsoleClient } from "./client.js";
import { quadrantAt, render } from "./mirror.js";
import {
  buildControlPanel,
  buildNotificationPanel,
  refreshControlPanel,
  refreshNotificationPanel,
} from "./panel.js";

function endpointFromQuery(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("endpoint") ?? "ws://127.0.0.1:8765";
}

function start(): void {
  const controls = document.getElementById("controls")!;
  const mirror = document.getElementById("mirror") as HTMLCanvasElement;
  const notes = document.getElementById("notifications")!;

  const client = new ConsoleClient(endpointFromQuery(), (url) =>
    new WebSocket(url) as unknown as import("./client.js").SocketLike);

  buildControlPanel(controls, client);
  buildNotificationPanel(notes, client);

  mirror.onclick = (ev) => {
    const rect = mirror.getBoundingClientRect();
    const x = (ev.clientX - rect.left) / rect.width;
    const y = 1 - (ev.clientY - rect.top) / rect.height;
    if (client.state.selectedShape == null) return;
    // hint targets the player whose half was tapped less recently; keep it
    // simple: left half aims P1, right half P2
    const player = quadrantAt(x, y) % 2 === 0 ? "P1" : "P2";
    void client.placeHint(x, y, player);
  };

  let dirty = true;
  client.onchange = () => { dirty = true; };
  client.onerrorMessage = (reason) => console.warn("server:", reason);

  const paint = () => {
    if (dirty) {
      dirty = false;
      const ctx = mirror.getContext("2d");
      if (ctx) render(ctx, client.state, mirror.width, mirror.height);
      refreshControlPanel(controls, client);
      refreshNotificationPanel(notes, client);
    }
    requestAnimationFrame(paint);
  };
  requestAnimationFrame(paint);

  client.connect();
}

window.addEventListener("DOMContentLoaded", start);
