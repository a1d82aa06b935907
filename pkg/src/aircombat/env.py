"""Episode orchestration: the step()/reset() interface over the lockstep wire.

The environment owns a gateway (action conversion) and an interpreter
(observation/reward/termination); the simulator sits behind a lockstep
client, in-process by default, TCP when pointed at a remote service.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .gateway import AgentAction, Gateway, GatewayConfig
from .interpreter import (
    FormationSpec,
    Interpreter,
    RewardConfig,
    TerminationConfig,
)
from .protocol.client import InProcTransport, LockstepClient, TcpTransport
from .protocol.messages import dynamic_state_from_wire
from .protocol.service import ServiceConfig, SimulationService
from .scenario import ScenarioConfig


class EpisodeStateError(RuntimeError):
    """step() after done, or before the first reset()."""


@dataclass(frozen=True)
class StepResult:
    observation: object
    reward: float
    done: bool
    info: dict


@dataclass
class EnvConfig:
    tick_dt: float = 0.1
    decision_dt: float = 1.0          # s between agent actions
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    termination: TerminationConfig = field(default_factory=TerminationConfig)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    seed: int = 0

    def __post_init__(self):
        decision_ms = round(self.decision_dt * 1000.0)
        tick_ms = round(self.tick_dt * 1000.0)
        if decision_ms <= 0 or decision_ms % tick_ms != 0:
            raise ValueError("decision_dt must be a positive multiple of tick_dt")


class FormationEnv:
    """Two-ship formation task with the published action/state spaces."""

    def __init__(self, cfg: EnvConfig, connect: str = None, service=None):
        self.cfg = cfg
        self._decision_ms = round(cfg.decision_dt * 1000.0)
        if connect:
            host, _, port = connect.partition(":")
            transport = TcpTransport(host, int(port or 7777))
            self._service = None
        elif service is not None:
            self._service = service
            transport = InProcTransport(service, label="env")
        else:
            self._service = SimulationService(ServiceConfig(
                tick_dt=cfg.tick_dt, scenario=cfg.scenario,
                reward_a=cfg.reward.a, seed=cfg.seed))
            transport = InProcTransport(self._service, label="env")
        self.client = LockstepClient(transport)
        self.gateway = Gateway(self.client, cfg.gateway)
        self.interpreter = Interpreter(reward_cfg=cfg.reward,
                                       termination_cfg=cfg.termination)
        self._spec = None
        self._lead_id = None
        self._wing_id = cfg.gateway.controlled_entity
        self._episode_active = False
        self._clock_ms = 0
        self._last_obs = None

    # -- episode interface ------------------------------------------------------

    def reset(self, seed=None):
        """Start a new episode; returns the initial observation."""
        scenario = self.gateway.issue_reset(seed)
        self._spec = FormationSpec(scenario["formation"]["aspect"],
                                   scenario["formation"]["distance"])
        self._lead_id = scenario["lead_id"]
        self._wing_id = scenario["controlled_id"]
        states = {e["entity_id"]: dynamic_state_from_wire(e["state"])
                  for e in scenario["entities"]}
        self.interpreter.begin_episode()
        self._episode_active = True
        self._clock_ms = 0
        obs, _, _ = self.interpreter.interpret(
            states[self._lead_id], states[self._wing_id], self._spec, 0.0)
        self._last_obs = obs
        return obs

    def step(self, action: AgentAction) -> StepResult:
        """Convert the action, run one decision interval, interpret the result."""
        if not self._episode_active:
            raise EpisodeStateError("episode is not active; call reset() first")
        command = self.gateway.command_message(action)
        result = self.client.cycle([command], delta_ms=self._decision_ms)
        if result.formation_change is not None:
            self._spec = FormationSpec(result.formation_change["aspect"],
                                       result.formation_change["distance"])
        self._clock_ms += self._decision_ms
        clock = self._clock_ms / 1000.0
        obs, reward, reason = self.interpreter.interpret(
            result.ground_truth[self._lead_id], result.ground_truth[self._wing_id],
            self._spec, clock)
        done = reason is not None
        if done:
            self._episode_active = False
        self._last_obs = obs
        return StepResult(observation=obs, reward=reward, done=done,
                          info={"termination_reason": reason,
                                "distance": obs.distance,
                                "sim_time": self.client.sim_time})

    def close(self):
        self.client.close()

    @property
    def formation(self) -> FormationSpec:
        return self._spec


class PursuitOraclePolicy:
    """Scripted formation-seeking policy over the observation space.

    Flies at the bearing to the formation point, with a speed surplus
    proportional to the distance; collapses to matching the point speed on
    arrival. Establishes that sampled episodes are solvable.
    """

    def __init__(self, gain: float = 0.05):
        self.gain = gain

    def __call__(self, obs) -> AgentAction:
        course = math.radians(obs.point_bearing)
        speed = obs.point_speed + self.gain * obs.distance
        return AgentAction(course=course, speed=speed)


@dataclass
class EvalEpisode:
    episode: int
    seed: int
    initial_distance: float
    success: bool
    time_to_formation: float  # s; NaN when never reached


@dataclass
class EvalReport:
    episodes: list

    @property
    def success_rate(self) -> float:
        if not self.episodes:
            return float("nan")
        return sum(e.success for e in self.episodes) / len(self.episodes)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["episode", "seed", "initial_d_w", "success", "time_to_formation"])
            for e in self.episodes:
                w.writerow([e.episode, e.seed, f"{e.initial_distance:.3f}",
                            int(e.success),
                            "" if math.isnan(e.time_to_formation)
                            else f"{e.time_to_formation:.3f}"])


def run_evaluation(policy, episodes: int, cfg: EnvConfig, seed: int = 0,
                   progress=None) -> EvalReport:
    """Measure formation acquisition: fixed-length episodes at a fine decision
    interval; success when the wingman comes within the success radius.

    Evaluation episodes run to the evaluation time limit with the stagnation
    cut disabled (it is a training-time data-quality device).
    """
    eval_cfg = EnvConfig(
        tick_dt=cfg.tick_dt,
        decision_dt=0.1,
        scenario=cfg.scenario,
        reward=cfg.reward,
        termination=TerminationConfig(
            max_episode_time=cfg.termination.eval_time_limit,
            stagnation_window=cfg.termination.stagnation_window,
            stagnation_threshold=cfg.termination.stagnation_threshold,
            eval_time_limit=cfg.termination.eval_time_limit,
            success_radius=cfg.termination.success_radius,
            stagnation_enabled=False,
        ),
        gateway=cfg.gateway,
        seed=seed,
    )
    radius = eval_cfg.termination.success_radius
    env = FormationEnv(eval_cfg)
    seeds = np.random.SeedSequence(seed).generate_state(max(episodes, 1), np.uint64)
    rows = []
    try:
        for i in range(episodes):
            ep_seed = int(seeds[i] & 0x7FFFFFFFFFFFFFFF)
            obs = env.reset(seed=ep_seed)
            initial = obs.distance
            success = obs.distance < radius
            t_hit = 0.0 if success else float("nan")
            done = success  # first crossing fixes both metrics; stop early then
            while not done:
                step = env.step(policy(obs))
                obs = step.observation
                done = step.done
                if obs.distance < radius:
                    success = True
                    t_hit = step.info["sim_time"]
                    done = True
            rows.append(EvalEpisode(episode=i, seed=ep_seed, initial_distance=initial,
                                    success=success, time_to_formation=t_hit))
            if progress:
                progress(rows[-1])
    finally:
        env.close()
    return EvalReport(rows)
