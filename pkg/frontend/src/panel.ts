/**
 * Left control panel and right notification panel.
 *
 * Every session command is one button (or one select), so anything the
 * caregiver can do is at most two taps away: pick a value, tap a target.
 */

import type { ConsoleClient } from "./client.js";
import { HINT_SHAPES } from "./state.js";

interface ButtonSpec {
  label: string;
  name: string;
  args?: Record<string, string | number | boolean>;
}

const PLAIN_BUTTONS: ButtonSpec[] = [
  { label: "Pause", name: "pause" },
  { label: "Resume", name: "resume" },
  { label: "Remove lines", name: "remove_lines" },
  { label: "Remove circles", name: "remove_circles" },
  { label: "Background music", name: "toggle_bg_music" },
  { label: "Play all melodies", name: "play_all_melodies" },
  { label: "Blobs", name: "toggle_blobs" },
  { label: "Swap players", name: "swap_players" },
  { label: "Swap hands P1", name: "swap_hands", args: { player: "P1" } },
  { label: "Swap hands P2", name: "swap_hands", args: { player: "P2" } },
];

const BRUSH_COLORS: [string, [number, number, number]][] = [
  ["red", [220, 60, 50]],
  ["blue", [60, 90, 220]],
  ["green", [40, 190, 90]],
  ["yellow", [235, 200, 40]],
];

const BACKGROUNDS: [string, [number, number, number]][] = [
  ["night", [16, 16, 24]],
  ["paper", [214, 204, 182]],
  ["slate", [44, 52, 64]],
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function buildControlPanel(root: HTMLElement, client: ConsoleClient): void {
  root.replaceChildren();
  const status = el("div", "status-line");
  status.id = "status-line";
  root.appendChild(status);

  const grid = el("div", "button-grid");
  for (const spec of PLAIN_BUTTONS) {
    const btn = el("button", "cmd", spec.label);
    btn.dataset.command = spec.name;
    btn.onclick = () => void client.sendControl(spec.name, spec.args ?? {});
    grid.appendChild(btn);
  }
  root.appendChild(grid);

  const evo = el("div", "row");
  evo.appendChild(el("span", "label", "Evolution"));
  const select = el("select");
  select.id = "evolution-mode";
  for (const mode of ["interactable", "automatic", "disabled"]) {
    const opt = el("option", undefined, mode);
    opt.value = mode;
    select.appendChild(opt);
  }
  select.onchange = () =>
    void client.sendControl("set_evolution_mode", { mode: select.value });
  evo.appendChild(select);
  root.appendChild(evo);

  const vib = el("div", "row");
  const vibToggle = el("button", "cmd", "Vibration on/off");
  vibToggle.id = "vibration-toggle";
  vibToggle.onclick = () =>
    void client.sendControl("set_vibration_enabled",
                            { enabled: !client.state.vibrationEnabled });
  vib.appendChild(vibToggle);
  root.appendChild(vib);

  const tutorials = el("div", "row");
  tutorials.appendChild(el("span", "label", "Tutorial"));
  for (const step of [1, 2, 3]) {
    const btn = el("button", "cmd", String(step));
    btn.onclick = () => void client.sendControl("tutorial_step", { index: step });
    tutorials.appendChild(btn);
  }
  root.appendChild(tutorials);

  const brushRows = el("div", "rows");
  for (const player of ["P1", "P2"]) {
    const row = el("div", "row");
    row.appendChild(el("span", "label", `${player} brush`));
    for (const [name, [r, g, b]] of BRUSH_COLORS) {
      const btn = el("button", "swatch", name);
      btn.style.background = `rgb(${r},${g},${b})`;
      btn.onclick = () =>
        void client.sendControl("set_brush_color", { player, r, g, b });
      row.appendChild(btn);
    }
    brushRows.appendChild(row);
  }
  root.appendChild(brushRows);

  const bgRow = el("div", "row");
  bgRow.appendChild(el("span", "label", "Canvas"));
  for (const [name, [r, g, b]] of BACKGROUNDS) {
    const btn = el("button", "swatch", name);
    btn.onclick = () =>
      void client.sendControl("set_background_color", { r, g, b });
    bgRow.appendChild(btn);
  }
  root.appendChild(bgRow);

  const hintRow = el("div", "row");
  hintRow.appendChild(el("span", "label", "Hint shape"));
  for (const shape of HINT_SHAPES) {
    const btn = el("button", "shape", shape);
    btn.dataset.shape = shape;
    btn.onclick = () => {
      client.state.selectedShape =
        client.state.selectedShape === shape ? null : shape;
      client.onchange?.();
    };
    hintRow.appendChild(btn);
  }
  const styleBtn = el("button", "shape", "dashed/wavy");
  styleBtn.id = "hint-style";
  styleBtn.onclick = () => {
    client.state.hintStyle =
      client.state.hintStyle === "dashed" ? "wavy" : "dashed";
    client.onchange?.();
  };
  hintRow.appendChild(styleBtn);
  root.appendChild(hintRow);

  const retry = el("button", "retry", "Retry");
  retry.id = "retry-command";
  retry.style.display = "none";
  retry.onclick = () => {
    const failed = client.failedCommand;
    if (failed) void client.sendControl(failed, {});
  };
  root.appendChild(retry);
}

export function refreshControlPanel(root: HTMLElement, client: ConsoleClient): void {
  const state = client.state;
  const status = root.querySelector<HTMLElement>("#status-line");
  if (status) {
    const bits = [state.status, state.paused ? "paused" : "running",
                  `chord ${state.chord}`];
    if (state.desynced) bits.push("DESYNC");
    status.textContent = bits.join(" | ");
    status.classList.toggle("desync", state.desynced);
    status.classList.toggle("dropped", state.status !== "connected");
  }
  const pendingNames = new Set(
    [...client.pending.values()].map((p) => p.name));
  for (const btn of root.querySelectorAll<HTMLButtonElement>("button.cmd")) {
    const name = btn.dataset.command;
    btn.classList.toggle("pending", name != null && pendingNames.has(name));
  }
  for (const btn of root.querySelectorAll<HTMLButtonElement>("button.shape")) {
    btn.classList.toggle("selected", btn.dataset.shape === state.selectedShape);
  }
  const retry = root.querySelector<HTMLElement>("#retry-command");
  if (retry) {
    retry.style.display = client.failedCommand ? "" : "none";
    retry.textContent = client.failedCommand
      ? `Retry ${client.failedCommand}` : "Retry";
  }
}

export function buildNotificationPanel(root: HTMLElement, client: ConsoleClient): void {
  root.replaceChildren();
  const toggle = el("div", "panel-toggle");
  toggle.id = "panel-toggle";
  toggle.onclick = () => {
    client.state.togglePanel();
    client.onchange?.();
  };
  const badge = el("span", "unread-badge");
  badge.id = "unread-badge";
  toggle.appendChild(badge);
  root.appendChild(toggle);

  const body = el("div", "panel-body");
  body.id = "panel-body";
  const markRead = el("button", "mark-read", "Mark all read");
  markRead.onclick = () => {
    client.state.markAllRead();
    client.onchange?.();
  };
  body.appendChild(markRead);
  const list = el("ul", "notification-list");
  list.id = "notification-list";
  body.appendChild(list);
  root.appendChild(body);
}

export function refreshNotificationPanel(root: HTMLElement, client: ConsoleClient): void {
  const state = client.state;
  const body = root.querySelector<HTMLElement>("#panel-body");
  if (body) body.style.display = state.panelHidden ? "none" : "";
  const badge = root.querySelector<HTMLElement>("#unread-badge");
  if (badge) {
    badge.textContent = state.unreadCount > 0 ? String(state.unreadCount) : "";
  }
  const list = root.querySelector<HTMLElement>("#notification-list");
  if (list && !state.panelHidden) {
    list.replaceChildren();
    // newest first, in tick order within the stream
    for (const entry of [...state.notifications].reverse()) {
      const item = el("li", entry.read ? "note read" : "note");
      const who = entry.player ?? "-";
      item.textContent =
        `[${entry.tick}] ${entry.kind} ${who} ${JSON.stringify(entry.payload)}`;
      list.appendChild(item);
    }
  }
}
