"""Operator entry points: serve, train, eval, replay, bench.

Exit codes: 0 success, 2 configuration error, 3 data/integrity error,
4 transport error.
"""

import argparse
import json
import logging
import os
import sys
import threading
import time
from datetime import datetime

from . import __version__
from .config import ConfigError, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRANSPORT = 4

log = logging.getLogger("aircombat")


def _make_run_dir(base: str, mode: str) -> str:
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    path = os.path.join(base, f"{stamp}-{mode}")
    suffix = 0
    while os.path.exists(path):
        suffix += 1
        path = os.path.join(base, f"{stamp}-{mode}-{suffix}")
    os.makedirs(path)
    return path


def _write_manifest(run_dir: str, mode: str, args, seed: int):
    manifest = {
        "mode": mode,
        "config": os.path.abspath(args.config) if args.config else None,
        "seed": seed,
        "output_dir": os.path.abspath(run_dir),
        "argv": sys.argv[1:],
        "version": __version__,
        "created": datetime.now().isoformat(timespec="seconds"),
    }
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def cmd_serve(args) -> int:
    from .protocol.service import Recorder, ServiceConfig, SimulationService
    from .protocol.tcp import TcpServer
    from .protocol.ws import WsServer

    app = load_config(args.config)
    cfg = ServiceConfig(tick_dt=app.sim.tick_dt, scenario=app.scenario,
                        envelope=app.sim.envelope, reward_a=app.reward.a,
                        seed=args.seed if args.seed is not None else app.run.seed,
                        realtime_factor=args.realtime_factor)
    recorder = Recorder(args.record, cfg) if args.record else None
    service = SimulationService(cfg, recorder=recorder)
    try:
        tcp = TcpServer(service, host=args.host, port=args.port).start()
        static_root = args.console if args.console else _default_console_root()
        ws = WsServer(service, host=args.host, port=args.ws_port,
                      static_root=static_root).start()
    except OSError as exc:
        print(f"bind failed: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    print(f"lockstep service on {args.host}:{tcp.port}, "
          f"websocket bridge on {args.host}:{ws.port}"
          + (f", console assets from {static_root}" if static_root else ""),
          flush=True)

    if args.drive:
        threading.Thread(target=_drive_loop, args=(service, app, args.drive),
                         daemon=True).start()
        print(f"driver flying: {args.drive}", flush=True)
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        pass
    finally:
        tcp.stop()
        ws.stop()
        if recorder:
            recorder.close()
    return EXIT_OK


def _default_console_root():
    here = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    candidate = os.path.join(here, "frontend", "dist")
    return candidate if os.path.isdir(candidate) else None


def _drive_loop(service, app, policy_name):
    """Fly episodes forever so observers have something to watch and steer."""
    from .env import FormationEnv

    policy = _load_policy_callable(policy_name)
    env = FormationEnv(app.env_config(decision_dt=app.run.eval_decision_dt),
                       service=service)
    obs = env.reset()
    while True:
        try:
            step = env.step(policy(obs))
            obs = env.reset() if step.done else step.observation
        except Exception:
            log.exception("driver stopped")
            return


def _load_policy_callable(name):
    from .env import PursuitOraclePolicy

    if name == "oracle":
        return PursuitOraclePolicy()
    from .learner import load_policy, scale_observation
    from .gateway import AgentAction

    ac = load_policy(name)

    def policy(obs):
        action = ac.deterministic_action(scale_observation(obs))
        return AgentAction(course=float(action[0]), speed=float(action[1]))

    return policy


def cmd_train(args) -> int:
    from dataclasses import replace

    from .env import FormationEnv
    from .learner.ppo import train

    app = load_config(args.config)
    ppo = app.ppo
    if args.updates is not None:
        ppo = replace(ppo, max_updates=args.updates)
    if args.seed is not None:
        ppo = replace(ppo, seed=args.seed)
    run_dir = _make_run_dir(args.output or app.run.output_dir, "train")
    _write_manifest(run_dir, "train", args, ppo.seed)
    env = FormationEnv(app.env_config(seed=ppo.seed))
    log_path = os.path.join(run_dir, "training_log.csv")
    ckpt_path = os.path.join(run_dir, "policy.json")

    def progress(row):
        print(f"update {row['update']:>4}  steps {row['total_steps']:>8}  "
              f"mean100 {row['mean_episode_reward_100']:>8.2f}  "
              f"value_loss {row['value_loss']:>8.3f}  "
              f"entropy {row['entropy']:>6.3f}", flush=True)

    try:
        train(env, ppo, log_path=log_path, checkpoint_path=ckpt_path, progress=progress)
    finally:
        env.close()
    print(f"checkpoint: {ckpt_path}\nlog: {log_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .env import run_evaluation
    from .learner import CheckpointError

    app = load_config(args.config)
    episodes = args.episodes if args.episodes is not None else app.run.episodes
    try:
        policy = _load_policy_callable(args.policy)
    except CheckpointError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_DATA
    run_dir = _make_run_dir(args.output or app.run.output_dir, "eval")
    seed = args.seed if args.seed is not None else app.run.seed
    _write_manifest(run_dir, "eval", args, seed)
    report = run_evaluation(policy, episodes, app.env_config(), seed=seed)
    out = os.path.join(run_dir, "evaluation.csv")
    report.write_csv(out)
    if report.episodes:
        rate = report.success_rate
        print(f"episodes: {len(report.episodes)}  success_rate: {rate:.3f}")
    else:
        print("episodes: 0  success_rate: n/a")
    print(f"report: {out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    from .protocol.recording import RecordingError, read_recording, replay_outbound
    from .protocol.ws import WsServer

    try:
        if args.verify:
            recorded, regenerated = replay_outbound(args.recording)
            if recorded == regenerated:
                print(f"verified: {len(recorded)} outbound frames reproduce byte-identically")
                return EXIT_OK
            print("MISMATCH: replay diverged from the recording", file=sys.stderr)
            return EXIT_DATA
        config, entries = read_recording(args.recording)
    except FileNotFoundError:
        print(f"recording not found: {args.recording}", file=sys.stderr)
        return EXIT_DATA
    except RecordingError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_DATA

    frames = [e["frame"] for e in entries if e["dir"] == "out"]

    class _StaticStream:
        """Minimal service stand-in: hands observers the recorded stream."""

        def __init__(self):
            self._sessions = []

        def register(self, deliver, label=None):
            self._sessions.append(deliver)
            return object()

        def unregister(self, session):
            pass

        def handle_frame(self, session, line):
            pass

    stream = _StaticStream()
    try:
        ws = WsServer(stream, port=args.ws_port).start()
    except OSError as exc:
        print(f"bind failed: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    print(f"replaying {len(frames)} frames on ws port {ws.port} at pace {args.pace}x",
          flush=True)

    from .protocol.recording import stream_frames

    deadline = time.monotonic() + args.subscriber_timeout
    while not stream._sessions and time.monotonic() < deadline:
        time.sleep(0.05)  # give a viewer a chance to attach before streaming
    stream_frames(frames, lambda m: [d(m) for d in list(stream._sessions)],
                  pace=args.pace)
    ws.stop()
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import format_report, run_benchmark
    from .simcore import fdm

    backends = fdm.available_backends() if args.backend == "all" else [args.backend]
    results = run_benchmark(cycles=args.cycles, backends=backends)
    print(format_report(results))
    floor = min(r["speedup"] for r in results.values())
    print(f"slowest backend sustains {floor:.0f}x real time")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aircombat",
        description="Fast air-combat simulation, lockstep protocol, PPO trainer.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="host the simulation service")
    p.add_argument("--config", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7777)
    p.add_argument("--ws-port", type=int, default=8080)
    p.add_argument("--realtime-factor", type=float, default=0.0,
                   help="0 = free running; 1 = wall-clock paced")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--record", default=None, help="write a session recording here")
    p.add_argument("--console", default=None, help="static console asset directory")
    p.add_argument("--drive", default=None,
                   help="fly episodes with 'oracle' or a policy checkpoint path")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("train", help="train the formation policy")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--updates", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a policy over seeded episodes")
    p.add_argument("--policy", required=True,
                   help="'oracle' or a policy checkpoint path")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="re-emit a recorded session over websocket")
    p.add_argument("--recording", required=True)
    p.add_argument("--ws-port", type=int, default=8080)
    p.add_argument("--pace", type=float, default=0.0,
                   help="sim-seconds per wall-second; 0 = as fast as possible")
    p.add_argument("--verify", action="store_true",
                   help="check deterministic reproduction instead of streaming")
    p.add_argument("--subscriber-timeout", type=float, default=10.0,
                   help="seconds to wait for the first viewer before streaming")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bench", help="simulation + lockstep throughput benchmark")
    p.add_argument("--cycles", type=int, default=20_000)
    p.add_argument("--backend", default="all",
                   choices=["all", "pure", "compiled"])
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("AIRCOMBAT_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConnectionError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
