/** View model: a pure reducer over the authoritative message stream.
 *
 * Rendered kinematics come only from received EntityState messages; the
 * formation marker is always recomputed from the latest lead state and the
 * authoritative spec (echoed back by the service after steering).
 */

import { formationPoint, horizontalDistance, rewardOf } from "./geometry.js";
import type { DynamicState, FormationSpec, ServerMessage } from "./protocol.js";

export interface TrackPoint {
  x: number;
  y: number;
  t: number; // sim time
}

export interface EntityTrack {
  id: string;
  force: string;
  state: DynamicState;
  trail: TrackPoint[];
}

export interface ViewState {
  connected: boolean;
  simTime: number;
  leadId: string | null;
  controlledId: string | null;
  rewardA: number;
  spec: FormationSpec | null;
  pendingSpec: FormationSpec | null; // locally dragged, until the echo lands
  entities: Map<string, EntityTrack>;
  sparkline: { t: number; reward: number }[];
  badFrames: number;
  lastError: string | null;
}

export const TRAIL_SECONDS = 60;
export const SPARKLINE_POINTS = 600;

export function initialState(): ViewState {
  return {
    connected: false,
    simTime: 0,
    leadId: null,
    controlledId: null,
    rewardA: 5e-7,
    spec: null,
    pendingSpec: null,
    entities: new Map(),
    sparkline: [],
    badFrames: 0,
    lastError: null,
  };
}

function pushTrail(track: EntityTrack, t: number): void {
  track.trail.push({ x: track.state.x, y: track.state.y, t });
  const cutoff = t - TRAIL_SECONDS;
  while (track.trail.length > 0 && track.trail[0].t < cutoff) {
    track.trail.shift();
  }
}

/** Distance from the controlled aircraft to the formation point, plus the
 * marker position; null until both sides are known. */
export function formationReadout(state: ViewState):
  { point: { x: number; y: number }; distance: number } | null {
  if (!state.spec || !state.leadId || !state.controlledId) return null;
  const lead = state.entities.get(state.leadId);
  const wing = state.entities.get(state.controlledId);
  if (!lead || !wing) return null;
  const point = formationPoint(lead.state, state.spec);
  return {
    point,
    distance: horizontalDistance(wing.state.x, wing.state.y, point.x, point.y),
  };
}

export function applyMessage(state: ViewState, msg: ServerMessage | null): ViewState {
  if (msg === null) {
    state.badFrames += 1;
    return state;
  }
  switch (msg.type) {
    case "ScenarioInit": {
      // fresh episode: authoritative snapshot replaces everything stale
      state.simTime = msg.sim_time;
      state.leadId = msg.payload.lead_id;
      state.controlledId = msg.payload.controlled_id;
      state.rewardA = msg.payload.reward_a;
      state.spec = { ...msg.payload.formation };
      state.pendingSpec = null;
      state.entities = new Map();
      state.sparkline = [];
      for (const e of msg.payload.entities) {
        state.entities.set(e.entity_id, {
          id: e.entity_id,
          force: e.force,
          state: { ...e.state },
          trail: [],
        });
      }
      break;
    }
    case "EntityState": {
      state.simTime = msg.sim_time;
      const p = msg.payload;
      const existing = state.entities.get(p.entity_id);
      if (existing) {
        existing.state = { ...p.ground_truth };
        pushTrail(existing, msg.sim_time);
      } else {
        state.entities.set(p.entity_id, {
          id: p.entity_id,
          force: p.force,
          state: { ...p.ground_truth },
          trail: [],
        });
      }
      break;
    }
    case "TimeAdvanceGrant": {
      // one decision boundary: append a reward sample
      state.simTime = msg.payload.t;
      const readout = formationReadout(state);
      if (readout) {
        state.sparkline.push({
          t: msg.payload.t,
          reward: rewardOf(readout.distance, state.rewardA),
        });
        if (state.sparkline.length > SPARKLINE_POINTS) {
          state.sparkline.splice(0, state.sparkline.length - SPARKLINE_POINTS);
        }
      }
      break;
    }
    case "SetFormation": {
      // authoritative echo: snap to it and drop any local pending value
      state.spec = { ...msg.payload };
      state.pendingSpec = null;
      break;
    }
    case "Error": {
      state.lastError = `${msg.payload.code}: ${msg.payload.detail}`;
      break;
    }
  }
  return state;
}
