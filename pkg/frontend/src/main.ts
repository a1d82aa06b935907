/** Console wiring: socket -> reducer -> render loop, plus operator controls. */

import { Camera } from "./camera.js";
import { degrees, radians, specFromPoint } from "./geometry.js";
import { applyMessage, formationReadout, initialState } from "./model.js";
import { ConsoleSession } from "./ws.js";
import { drawScene, drawSparkline } from "./view.js";

const MIN_DISTANCE = 50;      // m, client-side clamp for steering inputs
const MAX_DISTANCE = 50_000;  // m

const state = initialState();
const canvas = document.getElementById("map") as HTMLCanvasElement;
const spark = document.getElementById("sparkline") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const sparkCtx = spark.getContext("2d")!;
const camera = new Camera(canvas.width, canvas.height);

const el = (id: string) => document.getElementById(id)!;
const statusEl = el("status");
const distanceEl = el("distance-readout");
const rewardEl = el("reward-readout");
const timeEl = el("time-readout");
const badgeEl = el("diagnostics");
const warnEl = el("steer-warning");
const aspectSlider = el("aspect") as HTMLInputElement;
const distanceSlider = el("formation-distance") as HTMLInputElement;
const aspectValue = el("aspect-value");
const distanceValue = el("distance-value");
const leadCourse = el("lead-course") as HTMLInputElement;
const leadSpeed = el("lead-speed") as HTMLInputElement;

let framed = false;
let sliderDragging = false;
let markerDrag: { x: number; y: number } | null = null;

const wsUrl = `ws://${location.host || "127.0.0.1:8080"}/stream`;
const session = new ConsoleSession(wsUrl, {
  onMessage(msg) {
    applyMessage(state, msg);
    if (msg?.type === "ScenarioInit") framed = false;
  },
  onStatus(connected) {
    state.connected = connected;
  },
});
session.connect();

function clampDistance(d: number): { value: number; clamped: boolean } {
  if (d < MIN_DISTANCE) return { value: MIN_DISTANCE, clamped: true };
  if (d > MAX_DISTANCE) return { value: MAX_DISTANCE, clamped: true };
  return { value: d, clamped: false };
}

function steer(aspect: number, distance: number): void {
  const { value, clamped } = clampDistance(distance);
  warnEl.textContent = clamped
    ? `distance clamped to ${value.toFixed(0)} m`
    : "";
  state.pendingSpec = { aspect, distance: value };
  session.send(session.builder.setFormation(aspect, value));
}

aspectSlider.addEventListener("input", () => {
  sliderDragging = true;
  const aspect = radians(Number(aspectSlider.value));
  const distance = state.pendingSpec?.distance ?? state.spec?.distance ?? 1000;
  steer(aspect, distance);
});
distanceSlider.addEventListener("input", () => {
  sliderDragging = true;
  const aspect = state.pendingSpec?.aspect ?? state.spec?.aspect ?? 0;
  steer(aspect, Number(distanceSlider.value));
});
for (const slider of [aspectSlider, distanceSlider]) {
  slider.addEventListener("change", () => {
    sliderDragging = false;
  });
}

el("retask-lead").addEventListener("click", () => {
  if (!state.leadId) return;
  const lead = state.entities.get(state.leadId);
  const altitude = lead ? lead.state.alt : 5000;
  session.send(session.builder.maneuverCommand(
    state.leadId, altitude, Number(leadSpeed.value), radians(Number(leadCourse.value))));
});

el("fit-view").addEventListener("click", () => {
  frameAll();
});

function frameAll(): void {
  const pts = [...state.entities.values()].map((e) => ({ x: e.state.x, y: e.state.y }));
  const readout = formationReadout(state);
  if (readout) pts.push(readout.point);
  camera.fit(pts);
}

// --- marker dragging / pan / zoom -------------------------------------------

function markerScreenPosition(): { sx: number; sy: number } | null {
  const readout = formationReadout(state);
  if (!readout) return null;
  return camera.toScreen(readout.point.x, readout.point.y);
}

let panning: { sx: number; sy: number } | null = null;

canvas.addEventListener("mousedown", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const sx = ev.clientX - rect.left;
  const sy = ev.clientY - rect.top;
  const marker = markerScreenPosition();
  if (marker && Math.hypot(marker.sx - sx, marker.sy - sy) < 14) {
    markerDrag = camera.toWorld(sx, sy);
  } else {
    panning = { sx, sy };
  }
});

canvas.addEventListener("mousemove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const sx = ev.clientX - rect.left;
  const sy = ev.clientY - rect.top;
  if (markerDrag) {
    markerDrag = camera.toWorld(sx, sy);
  } else if (panning) {
    camera.panPixels(sx - panning.sx, sy - panning.sy);
    panning = { sx, sy };
  }
});

function finishDrag(): void {
  if (markerDrag && state.leadId) {
    const lead = state.entities.get(state.leadId);
    if (lead) {
      const spec = specFromPoint(lead.state, markerDrag.x, markerDrag.y);
      steer(spec.aspect, spec.distance);
    }
  }
  markerDrag = null;
  panning = null;
}

canvas.addEventListener("mouseup", finishDrag);
canvas.addEventListener("mouseleave", finishDrag);
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const rect = canvas.getBoundingClientRect();
  camera.zoomAt(ev.clientX - rect.left, ev.clientY - rect.top,
                ev.deltaY < 0 ? 1.2 : 1 / 1.2);
}, { passive: false });

// --- render loop ---------------------------------------------------------------

function render(): void {
  if (!framed && state.entities.size > 0) {
    frameAll();
    framed = true;
  }
  drawScene(ctx, camera, state, markerDrag);
  drawSparkline(sparkCtx, spark.width, spark.height, state.sparkline);

  statusEl.textContent = state.connected ? "connected" : "disconnected, retrying";
  statusEl.className = state.connected ? "ok" : "bad";
  timeEl.textContent = `t = ${state.simTime.toFixed(1)} s`;
  const readout = formationReadout(state);
  if (readout) {
    distanceEl.textContent = `d_w = ${readout.distance.toFixed(1)} m`;
    const reward = state.sparkline.length
      ? state.sparkline[state.sparkline.length - 1].reward
      : null;
    rewardEl.textContent = reward === null ? "r = –" : `r = ${reward.toFixed(4)}`;
  } else {
    distanceEl.textContent = "d_w = –";
    rewardEl.textContent = "r = –";
  }
  badgeEl.textContent = state.badFrames > 0 ? `${state.badFrames} bad frames` : "";
  if (!sliderDragging && !markerDrag && state.spec) {
    aspectSlider.value = String(Math.round(degrees(state.spec.aspect)));
    distanceSlider.value = String(Math.round(state.spec.distance));
  }
  aspectValue.textContent = `${aspectSlider.value}°`;
  distanceValue.textContent = `${distanceSlider.value} m`;
  requestAnimationFrame(render);
}

requestAnimationFrame(render);
