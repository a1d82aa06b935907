/** Canvas plan-view renderer: north-up, oriented glyphs, fading trails. */

import { Camera } from "./camera.js";
import { formationPoint } from "./geometry.js";
import { formationReadout, TRAIL_SECONDS, ViewState } from "./model.js";

export const COLORS: Record<string, string> = {
  friendly: "#5dd0ff",
  hostile: "#ff6d6d",
  neutral: "#d9d9a0",
  marker: "#ffd75d",
  pending: "#ffd75d66",
  grid: "#20303a",
  text: "#c8d6dd",
};

export function drawScene(ctx: CanvasRenderingContext2D, camera: Camera,
                          state: ViewState, dragPoint: { x: number; y: number } | null): void {
  const { width, height } = camera;
  ctx.fillStyle = "#0b1318";
  ctx.fillRect(0, 0, width, height);
  drawGrid(ctx, camera);

  for (const track of state.entities.values()) {
    drawTrail(ctx, camera, track.trail, COLORS[track.force] ?? COLORS.neutral, state.simTime);
  }
  const readout = formationReadout(state);
  if (readout) {
    drawMarker(ctx, camera, readout.point, COLORS.marker);
    const wing = state.controlledId ? state.entities.get(state.controlledId) : null;
    if (wing) {
      drawDashedLine(ctx, camera, wing.state, readout.point);
    }
  }
  if (dragPoint) {
    drawMarker(ctx, camera, dragPoint, COLORS.pending);
  }
  if (state.pendingSpec && state.leadId) {
    const lead = state.entities.get(state.leadId);
    if (lead) drawMarker(ctx, camera, formationPoint(lead.state, state.pendingSpec), COLORS.pending);
  }
  for (const track of state.entities.values()) {
    const glyphColor = track.id === state.controlledId ? "#9dff8a" : (COLORS[track.force] ?? COLORS.neutral);
    drawAircraft(ctx, camera, track.state.x, track.state.y, track.state.course, glyphColor);
    const { sx, sy } = camera.toScreen(track.state.x, track.state.y);
    ctx.fillStyle = COLORS.text;
    ctx.font = "11px system-ui, sans-serif";
    ctx.fillText(track.id, sx + 12, sy - 10);
  }
  drawNorthArrow(ctx);
}

function drawGrid(ctx: CanvasRenderingContext2D, camera: Camera): void {
  const spacingMeters = niceGridSpacing(camera.pixelsPerMeter);
  const topLeft = camera.toWorld(0, 0);
  const bottomRight = camera.toWorld(camera.width, camera.height);
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  ctx.beginPath();
  const startX = Math.floor(topLeft.x / spacingMeters) * spacingMeters;
  for (let x = startX; x <= bottomRight.x; x += spacingMeters) {
    const { sx } = camera.toScreen(x, 0);
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, camera.height);
  }
  const startY = Math.floor(bottomRight.y / spacingMeters) * spacingMeters;
  for (let y = startY; y <= topLeft.y; y += spacingMeters) {
    const { sy } = camera.toScreen(0, y);
    ctx.moveTo(0, sy);
    ctx.lineTo(camera.width, sy);
  }
  ctx.stroke();
  ctx.fillStyle = "#3a4f5c";
  ctx.font = "10px system-ui, sans-serif";
  ctx.fillText(gridLabel(spacingMeters), 8, camera.height - 8);
}

export function niceGridSpacing(pixelsPerMeter: number): number {
  const targetPixels = 90;
  const raw = targetPixels / pixelsPerMeter;
  const magnitude = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (magnitude * mult >= raw) return magnitude * mult;
  }
  return magnitude * 10;
}

function gridLabel(meters: number): string {
  return meters >= 1000 ? `grid ${meters / 1000} km` : `grid ${meters} m`;
}

function drawTrail(ctx: CanvasRenderingContext2D, camera: Camera,
                   trail: { x: number; y: number; t: number }[], color: string,
                   now: number): void {
  for (let i = 1; i < trail.length; i++) {
    const age = now - trail[i].t;
    const alpha = Math.max(0, 1 - age / TRAIL_SECONDS) * 0.6;
    const a = camera.toScreen(trail[i - 1].x, trail[i - 1].y);
    const b = camera.toScreen(trail[i].x, trail[i].y);
    ctx.strokeStyle = color;
    ctx.globalAlpha = alpha;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(a.sx, a.sy);
    ctx.lineTo(b.sx, b.sy);
    ctx.stroke();
  }
  ctx.globalAlpha = 1;
}

function drawAircraft(ctx: CanvasRenderingContext2D, camera: Camera,
                      x: number, y: number, course: number, color: string): void {
  const { sx, sy } = camera.toScreen(x, y);
  ctx.save();
  ctx.translate(sx, sy);
  ctx.rotate(course); // clockwise from north == clockwise from screen-up
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.moveTo(0, -10);
  ctx.lineTo(7, 8);
  ctx.lineTo(0, 3);
  ctx.lineTo(-7, 8);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}

function drawMarker(ctx: CanvasRenderingContext2D, camera: Camera,
                    point: { x: number; y: number }, color: string): void {
  const { sx, sy } = camera.toScreen(point.x, point.y);
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(sx, sy, 9, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(sx - 13, sy);
  ctx.lineTo(sx + 13, sy);
  ctx.moveTo(sx, sy - 13);
  ctx.lineTo(sx, sy + 13);
  ctx.stroke();
}

function drawDashedLine(ctx: CanvasRenderingContext2D, camera: Camera,
                        from: { x: number; y: number }, to: { x: number; y: number }): void {
  const a = camera.toScreen(from.x, from.y);
  const b = camera.toScreen(to.x, to.y);
  ctx.strokeStyle = "#5d7a8a";
  ctx.setLineDash([5, 5]);
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(a.sx, a.sy);
  ctx.lineTo(b.sx, b.sy);
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawNorthArrow(ctx: CanvasRenderingContext2D): void {
  ctx.save();
  ctx.translate(28, 34);
  ctx.strokeStyle = COLORS.text;
  ctx.fillStyle = COLORS.text;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(0, 12);
  ctx.lineTo(0, -10);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(0, -14);
  ctx.lineTo(5, -4);
  ctx.lineTo(-5, -4);
  ctx.closePath();
  ctx.fill();
  ctx.font = "11px system-ui, sans-serif";
  ctx.fillText("N", 8, -4);
  ctx.restore();
}

export function drawSparkline(ctx: CanvasRenderingContext2D, width: number,
                              height: number, points: { reward: number }[]): void {
  ctx.fillStyle = "#0b1318";
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = "#24414f";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  for (const frac of [0.5]) {
    ctx.strokeStyle = "#1c2e38";
    ctx.beginPath();
    ctx.moveTo(0, height * frac);
    ctx.lineTo(width, height * frac);
    ctx.stroke();
  }
  if (points.length < 2) return;
  ctx.strokeStyle = "#9dff8a";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  const n = points.length;
  for (let i = 0; i < n; i++) {
    const x = (i / (n - 1)) * (width - 4) + 2;
    const y = height - 3 - points[i].reward * (height - 6);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
}
