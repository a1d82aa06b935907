"""Acceptance gate: every exit criterion at its stated tolerance.

Each test prints one PASS line with the measured quantities. The heavyweight
checks (solvability run, desk-scale training, trained-policy evaluation) are
marked slow; run `pytest -m "not slow"` for the quick subset, plain `pytest`
for the full gate. Criteria 7 and 9 share one training session.
"""

import math

import numpy as np
import pytest

from helpers import fd_gradient, flat, make_batch, ratio_margins_ok

from aircombat.env import EnvConfig, FormationEnv, PursuitOraclePolicy, run_evaluation
from aircombat.gateway import AgentAction
from aircombat.interpreter import TerminationConfig, check_termination, gaussian_reward
from aircombat.learner import PPOConfig, loss_and_grads, scale_observation
from aircombat.learner.nets import ActorCritic, init_params
from aircombat.learner.ppo import train
from aircombat.scenario import ScenarioConfig

# Reduced desk-scale scenario: the 3500 m spawn box bounds the initial
# separation by its diagonal (9.9 km); formation offsets stay under 2 km.
DESK_SCENARIO = ScenarioConfig(position_box=3500.0,
                               formation_distance_range=(500.0, 2000.0))
DESK_SEEDS = (101, 202, 303)
REWARD_TARGET = 150.0
PLATEAU_CEILING = 50.0


def test_criterion_1_reward_exactness():
    # published reference values carry six decimals; the 1e-9 tolerance is
    # checked against the full-precision formula value
    cases = [(0.0, 1.0), (1000.0, 0.606531), (2000.0, 0.135335)]
    for d, printed in cases:
        got = gaussian_reward(d, 5e-7)
        assert round(got, 6) == printed, f"d={d}"
        assert got == pytest.approx(math.exp(-5e-7 * d * d), abs=1e-9), f"d={d}"
    assert gaussian_reward(0.0, 5e-7) == 1.0
    print("\nACCEPTANCE 1 PASS: gaussian reward matches exp(-a*d^2) at 0/1000/2000 m "
          "(tol 1e-9; printed 6-decimal values reproduced)")


def test_criterion_2_termination_fidelity():
    cfg = TerminationConfig()
    healthy = [(float(t), 1.0) for t in range(1, 360)]
    # hard stop at exactly 360 s
    assert check_termination(360.0, healthy, cfg) == "time_limit"
    assert check_termination(359.999, healthy, cfg) is None
    # stagnation after exactly 180 s of sub-threshold rewards, never earlier
    h = [(float(t), 1e-10) for t in range(1, 181)]
    assert check_termination(180.0, h, cfg) == "stagnation"
    assert check_termination(179.9, h[:179], cfg) is None
    h_recovered = [(float(t), 1e-10) for t in range(1, 180)] + [(180.0, 0.5)]
    assert check_termination(180.0, h_recovered, cfg) is None
    # end to end: an episode ends on the exact step
    env = FormationEnv(EnvConfig(
        scenario=ScenarioConfig(position_box=500.0),
        termination=TerminationConfig(stagnation_enabled=False), seed=1))
    env.reset(seed=1)
    steps = 0
    while True:
        steps += 1
        r = env.step(AgentAction(course=0.0, speed=300.0))
        if r.done:
            break
    env.close()
    assert steps == 360 and r.info["termination_reason"] == "time_limit"
    assert r.info["sim_time"] == 360.0
    print("ACCEPTANCE 2 PASS: 360 s time limit exact; stagnation fires at 180 s, not before")


def test_criterion_3_fdm_property_suite():
    from aircombat.geometry import wrap_course_error
    from aircombat.simcore import (DynamicState, Envelope, ManeuverCommand,
                                   autopilot, fdm, integrate_kinematics)

    env = Envelope()
    rng = np.random.default_rng(2025)
    for _ in range(10_000):
        s = DynamicState(x=rng.uniform(-5e4, 5e4), y=rng.uniform(-5e4, 5e4),
                         alt=rng.uniform(0, 15000),
                         course=rng.uniform(0, 2 * math.pi),
                         speed=rng.uniform(env.v_min, env.v_max))
        cmd = env.clamp_command(ManeuverCommand(
            altitude=rng.uniform(0, 15000), speed=rng.uniform(0, 800),
            course=rng.uniform(-10, 10)))
        a_lon, omega, climb = autopilot(s, cmd, env)
        assert abs(omega * s.speed) <= env.a_lat_max + 1e-9
        assert abs(a_lon) <= env.a_lon_max
        assert abs(climb) <= env.climb_rate_max
        nxt = integrate_kinematics(s, a_lon, omega, climb, 0.1, env)
        assert env.v_min <= nxt.speed <= env.v_max
        assert 0.0 <= nxt.course < 2 * math.pi

    # equilibrium is an exact fixed point
    s = DynamicState(x=1.0, y=2.0, alt=5000.0, course=2.2, speed=320.0)
    assert autopilot(s, ManeuverCommand.hold(s), env) == (0.0, 0.0, 0.0)

    # constant-command convergence within 120 s of sim time
    rng = np.random.default_rng(77)
    for _ in range(20):
        s = DynamicState(alt=5000.0, course=rng.uniform(0, 2 * math.pi),
                         speed=rng.uniform(100, 500))
        cmd = ManeuverCommand(altitude=5000.0, speed=rng.uniform(100, 500),
                              course=rng.uniform(0, 2 * math.pi))
        for _ in range(1200):
            s = fdm.step(s, cmd, env, 0.1)
        assert abs(s.speed - cmd.speed) < 1.0
        assert abs(wrap_course_error(s.course - cmd.course)) < 0.01
    print("ACCEPTANCE 3 PASS: 10,000 random ticks inside the envelope; "
          "equilibrium exact; convergence < 120 s; course wrapped")


def test_criterion_4_protocol_roundtrip_and_replay(tmp_path):
    from test_protocol import _random_message, command_payload

    from aircombat.protocol import (InProcTransport, LockstepClient,
                                    ServiceConfig, SimulationService, decode, encode)
    from aircombat.protocol.recording import replay_outbound
    from aircombat.protocol.service import Recorder

    rng = np.random.default_rng(6)
    for _ in range(10_000):
        m = _random_message(rng)
        assert decode(encode(m)) == m

    cfg = ServiceConfig(seed=5, scenario=ScenarioConfig(position_box=4000.0))
    path = tmp_path / "acceptance.jsonl"
    svc = SimulationService(cfg, recorder=Recorder(path, cfg))
    ctl = LockstepClient(InProcTransport(svc))
    ctl.reset(seed=8)
    grants = []
    for k in range(30):
        result = ctl.cycle([command_payload(speed=200.0 + k, course=0.01 * k)],
                           delta_ms=1000)
        grants.append(result.grant_time)
    assert grants == [float(k + 1) for k in range(30)]  # strictly increasing by delta
    svc.recorder.close()
    recorded, regenerated = replay_outbound(path)
    assert recorded == regenerated and len(recorded) > 60
    print("ACCEPTANCE 4 PASS: 10,000-message codec identity; grants monotone; "
          f"replay reproduced {len(recorded)} frames byte-identically")


def test_criterion_5_ppo_gradient_oracle():
    cfg = PPOConfig(batch_size=8, n_steps=8)
    checked = 0
    worst = 0.0
    seed = 0
    while checked < 20:
        seed += 1
        ac = ActorCritic(init_params(np.random.default_rng(seed), hidden=2))
        obs, z, logp_old, adv, ret = make_batch(ac, m=8, seed=1000 + seed)
        if not ratio_margins_ok(ac, obs, z, logp_old, cfg.clip_range):
            continue  # resample: a kink within h would break the FD oracle
        _, analytic = loss_and_grads(ac, obs, z, logp_old, adv, ret, cfg)

        def objective():
            stats, _ = loss_and_grads(ac, obs, z, logp_old, adv, ret, cfg)
            return stats["objective"]

        numeric = fd_gradient(objective, ac.params, h=1e-5)
        a, n = flat(analytic), flat(numeric)
        rel = np.linalg.norm(a - n) / max(np.linalg.norm(n), 1e-12)
        worst = max(worst, rel)
        assert rel < 1e-4, f"net {checked}: relative error {rel:.3e}"
        checked += 1
    print(f"ACCEPTANCE 5 PASS: 20 toy nets, analytic vs central differences, "
          f"worst relative error {worst:.2e} < 1e-4")


@pytest.mark.slow
def test_criterion_6_solvability_oracle():
    report = run_evaluation(PursuitOraclePolicy(), 500,
                            EnvConfig(scenario=ScenarioConfig()), seed=9000)
    rate = report.success_rate
    assert rate >= 0.95, f"oracle success rate {rate:.3f} below 0.95"
    print(f"ACCEPTANCE 6 PASS: pursuit oracle success {rate:.3f} >= 0.95 "
          f"over 500 episodes (600 s limit)")


def _learning_signature(rows):
    """Near-zero exploration plateau followed by sustained growth."""
    means = [r["mean_episode_reward_100"] for r in rows
             if not math.isnan(r["mean_episode_reward_100"])]
    if len(means) < 30:
        return False, "curve too short"
    early = float(np.mean(means[:20]))
    peak = max(means)
    late = float(np.mean(means[-5:]))
    if early >= PLATEAU_CEILING:
        return False, f"no exploration plateau (early mean {early:.1f})"
    if peak < REWARD_TARGET:
        return False, f"peak {peak:.1f} below target"
    if late < REWARD_TARGET * 0.8:
        return False, f"growth not sustained (late mean {late:.1f})"
    return True, f"early {early:.1f} -> late {late:.1f} (peak {peak:.1f})"


_training_cache = {}


def desk_training(tmp_path_factory):
    """Train up to 3 seeds, stopping at the first that meets the target."""
    if "result" in _training_cache:
        return _training_cache["result"]
    outcomes = []
    winner = None
    for seed in DESK_SEEDS:
        env = FormationEnv(EnvConfig(scenario=DESK_SCENARIO, seed=seed))
        cfg = PPOConfig(seed=seed, max_updates=500)

        def stop_when(mean100, rows):
            return (not math.isnan(mean100)) and mean100 >= REWARD_TARGET and len(rows) >= 30

        ac, rows = train(env, cfg, stop_when=stop_when)
        env.close()
        ok, detail = _learning_signature(rows)
        outcomes.append((seed, len(rows), detail, ok))
        if ok:
            winner = (seed, ac, rows)
            break
    _training_cache["result"] = (winner, outcomes)
    return _training_cache["result"]


@pytest.mark.slow
def test_criterion_7_desk_scale_training(tmp_path_factory):
    winner, outcomes = desk_training(tmp_path_factory)
    summary = "; ".join(f"seed {s}: {n} updates, {d}" for s, n, d, _ in outcomes)
    assert winner is not None, f"no seed reached {REWARD_TARGET}: {summary}"
    seed, _, rows = winner
    assert len(rows) <= 500
    print(f"ACCEPTANCE 7 PASS: seed {seed} reached mean100 >= {REWARD_TARGET} "
          f"in {len(rows)} updates with the plateau-then-growth signature ({summary})")


def test_criterion_8_throughput():
    from aircombat.bench import run_benchmark
    from aircombat.simcore import fdm

    results = run_benchmark(cycles=6000, backends=[fdm.fdm_backend()])
    speedup = next(iter(results.values()))["speedup"]
    assert speedup >= 300.0, f"{speedup:.0f}x below the 300x floor"
    print(f"ACCEPTANCE 8 PASS: simulation + lockstep at {speedup:.0f}x real time "
          f"(2 aircraft, dt=0.1 s, single-threaded)")


@pytest.mark.slow
def test_criterion_9_trained_policy_evaluation(tmp_path_factory):
    winner, _ = desk_training(tmp_path_factory)
    assert winner is not None, "criterion 7 produced no trained policy"
    seed, ac, _ = winner

    def policy(obs):
        action = ac.deterministic_action(scale_observation(obs))
        return AgentAction(course=float(action[0]), speed=float(action[1]))

    report = run_evaluation(policy, 200, EnvConfig(scenario=DESK_SCENARIO),
                            seed=31_000 + seed)
    rate = report.success_rate
    assert rate >= 0.60, f"trained policy success {rate:.3f} below 0.60"
    print(f"ACCEPTANCE 9 PASS: trained policy (seed {seed}) success {rate:.3f} "
          f">= 0.60 over 200 episodes at 0.1 s decision interval")
