import { describe, expect, it } from "vitest";

import { MessageBuilder, parseMessage } from "./protocol.js";

const DS = {
  x: 1.0, y: 2.0, alt: 5000.0, course: 0.3, speed: 300.0,
  a_lon: 0.0, turn_rate: 0.0, climb_rate: 0.0,
};

function scenarioInitFrame(): string {
  return JSON.stringify({
    type: "ScenarioInit", sim_time: 0.0, sequence: 1,
    payload: {
      seed: 7, tick_dt: 0.1, reward_a: 5e-7,
      controlled_id: "wingman", lead_id: "lead",
      formation: { aspect: 1.2, distance: 900.0 },
      entities: [
        { entity_id: "lead", force: "friendly", state: DS },
        { entity_id: "wingman", force: "friendly", state: { ...DS, x: -500 } },
      ],
    },
  });
}

describe("parseMessage", () => {
  it("accepts a well-formed scenario init", () => {
    const msg = parseMessage(scenarioInitFrame());
    expect(msg?.type).toBe("ScenarioInit");
    if (msg?.type === "ScenarioInit") {
      expect(msg.payload.formation.distance).toBe(900.0);
      expect(msg.payload.entities).toHaveLength(2);
    }
  });

  it("accepts entity states and grants", () => {
    const es = parseMessage(JSON.stringify({
      type: "EntityState", sim_time: 3.0, sequence: 9,
      payload: {
        entity_id: "lead", force: "friendly", ground_truth: DS,
        perceived_self: null, detected: [], weapon_count: 0,
      },
    }));
    expect(es?.type).toBe("EntityState");
    const grant = parseMessage(JSON.stringify({
      type: "TimeAdvanceGrant", sim_time: 3.0, sequence: 10, payload: { t: 3.0 },
    }));
    expect(grant?.type).toBe("TimeAdvanceGrant");
  });

  it("rejects malformed frames instead of throwing", () => {
    expect(parseMessage("{oops")).toBeNull();
    expect(parseMessage("42")).toBeNull();
    expect(parseMessage(JSON.stringify({ type: "EntityState", sim_time: 0, sequence: 1, payload: { entity_id: "x", ground_truth: { x: 1 } } }))).toBeNull();
    expect(parseMessage(JSON.stringify({ type: "SetFormation", sim_time: 0, sequence: 1, payload: { aspect: "east", distance: 100 } }))).toBeNull();
  });

  it("ignores message types the console does not consume", () => {
    expect(parseMessage(JSON.stringify({
      type: "TimeAdvanceRequest", sim_time: 0, sequence: 1, payload: { t: 1 },
    }))).toBeNull();
  });
});

describe("MessageBuilder", () => {
  it("numbers outbound frames with a strictly increasing sequence", () => {
    const b = new MessageBuilder();
    const seqs = [b.subscribe(), b.setFormation(0.5, 800), b.maneuverCommand("lead", 5000, 300, 1.0)]
      .map((frame) => JSON.parse(frame).sequence);
    expect(seqs).toEqual([1, 2, 3]);
  });

  it("emits the wire field names the service validates", () => {
    const b = new MessageBuilder();
    const cmd = JSON.parse(b.maneuverCommand("lead", 5000, 320, 2.0));
    expect(cmd.payload).toEqual({ entity_id: "lead", altitude: 5000, speed: 320, course: 2.0 });
    const sf = JSON.parse(b.setFormation(1.5, 750));
    expect(sf.payload).toEqual({ aspect: 1.5, distance: 750 });
  });
});
