/** Plan geometry mirroring the simulator's conventions: east-north meters,
 * angles clockwise from north, velocity = speed * (sin c, cos c). */

import type { DynamicState, FormationSpec } from "./protocol.js";

export const TWO_PI = 2 * Math.PI;

export function wrapTwoPi(angle: number): number {
  let r = angle % TWO_PI;
  if (r < 0) r += TWO_PI;
  if (r >= TWO_PI) r -= TWO_PI;
  return r;
}

export function degrees(rad: number): number {
  return (rad * 180) / Math.PI;
}

export function radians(deg: number): number {
  return (deg * Math.PI) / 180;
}

/** The formation point rigidly attached to the lead frame. */
export function formationPoint(
  lead: Pick<DynamicState, "x" | "y" | "course">,
  spec: FormationSpec,
): { x: number; y: number } {
  const angle = lead.course + spec.aspect;
  return {
    x: lead.x + spec.distance * Math.sin(angle),
    y: lead.y + spec.distance * Math.cos(angle),
  };
}

/** Inverse of formationPoint: the spec that puts the point at (px, py). */
export function specFromPoint(
  lead: Pick<DynamicState, "x" | "y" | "course">,
  px: number,
  py: number,
): FormationSpec {
  const dx = px - lead.x;
  const dy = py - lead.y;
  const distance = Math.hypot(dx, dy);
  if (distance === 0) return { aspect: 0, distance: 0 };
  const bearing = wrapTwoPi(Math.atan2(dx, dy));
  return { aspect: wrapTwoPi(bearing - lead.course), distance };
}

export function horizontalDistance(ax: number, ay: number, bx: number, by: number): number {
  return Math.hypot(bx - ax, by - ay);
}

/** Gaussian formation reward, identical formula to the interpreter. */
export function rewardOf(distance: number, a: number): number {
  return Math.exp(-a * distance * distance);
}
