/** Wire schema over the WebSocket bridge: one JSON message per text frame. */

export type Force = "friendly" | "hostile" | "neutral";

export interface DynamicState {
  x: number;
  y: number;
  alt: number;
  course: number; // rad, clockwise from north
  speed: number;  // m/s
  a_lon: number;
  turn_rate: number;
  climb_rate: number;
}

export interface FormationSpec {
  aspect: number;   // rad, clockwise from the lead course
  distance: number; // m
}

export interface ScenarioInit {
  type: "ScenarioInit";
  sim_time: number;
  sequence: number;
  payload: {
    seed: number;
    tick_dt: number;
    reward_a: number;
    controlled_id: string;
    lead_id: string;
    formation: FormationSpec;
    entities: { entity_id: string; force: Force; state: DynamicState }[];
  };
}

export interface EntityState {
  type: "EntityState";
  sim_time: number;
  sequence: number;
  payload: {
    entity_id: string;
    force: Force;
    ground_truth: DynamicState;
    perceived_self: unknown;
    detected: unknown[];
    weapon_count: number;
  };
}

export interface TimeAdvanceGrant {
  type: "TimeAdvanceGrant";
  sim_time: number;
  sequence: number;
  payload: { t: number };
}

export interface SetFormation {
  type: "SetFormation";
  sim_time: number;
  sequence: number;
  payload: FormationSpec;
}

export interface ErrorMessage {
  type: "Error";
  sim_time: number;
  sequence: number;
  payload: { code: string; detail: string };
}

export type ServerMessage =
  | ScenarioInit
  | EntityState
  | TimeAdvanceGrant
  | SetFormation
  | ErrorMessage;

const DYNAMIC_FIELDS: (keyof DynamicState)[] = [
  "x", "y", "alt", "course", "speed", "a_lon", "turn_rate", "climb_rate",
];

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isDynamicState(v: unknown): v is DynamicState {
  if (typeof v !== "object" || v === null) return false;
  const o = v as Record<string, unknown>;
  return DYNAMIC_FIELDS.every((k) => isFiniteNumber(o[k]));
}

function isEnvelope(o: Record<string, unknown>): boolean {
  return typeof o.type === "string" && isFiniteNumber(o.sim_time)
    && typeof o.sequence === "number" && typeof o.payload === "object"
    && o.payload !== null;
}

/** Parse one frame; returns null for anything malformed (callers count those). */
export function parseMessage(text: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const m = obj as Record<string, unknown>;
  if (!isEnvelope(m)) return null;
  const p = m.payload as Record<string, unknown>;
  switch (m.type) {
    case "ScenarioInit": {
      const formation = p.formation as Record<string, unknown> | undefined;
      const entities = p.entities;
      if (!formation || !isFiniteNumber(formation.aspect)
        || !isFiniteNumber(formation.distance)) return null;
      if (!Array.isArray(entities)) return null;
      for (const e of entities) {
        const ent = e as Record<string, unknown>;
        if (typeof ent.entity_id !== "string" || !isDynamicState(ent.state)) return null;
      }
      if (typeof p.controlled_id !== "string" || typeof p.lead_id !== "string") return null;
      if (!isFiniteNumber(p.reward_a)) return null;
      return obj as ScenarioInit;
    }
    case "EntityState":
      if (typeof p.entity_id !== "string" || !isDynamicState(p.ground_truth)) return null;
      return obj as EntityState;
    case "TimeAdvanceGrant":
      if (!isFiniteNumber(p.t)) return null;
      return obj as TimeAdvanceGrant;
    case "SetFormation":
      if (!isFiniteNumber(p.aspect) || !isFiniteNumber(p.distance)) return null;
      return obj as SetFormation;
    case "Error":
      if (typeof p.code !== "string" || typeof p.detail !== "string") return null;
      return obj as ErrorMessage;
    default:
      return null; // types the console does not consume
  }
}

/** Builds outbound frames with a per-session strictly increasing sequence. */
export class MessageBuilder {
  private sequence = 0;

  private envelope(type: string, payload: unknown): string {
    this.sequence += 1;
    return JSON.stringify({ type, sim_time: 0.0, sequence: this.sequence, payload });
  }

  subscribe(): string {
    return this.envelope("Subscribe", {});
  }

  setFormation(aspect: number, distance: number): string {
    return this.envelope("SetFormation", { aspect, distance });
  }

  maneuverCommand(entityId: string, altitude: number, speed: number, course: number): string {
    return this.envelope("ManeuverCommand", {
      entity_id: entityId, altitude, speed, course,
    });
  }
}
