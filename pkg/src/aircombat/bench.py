"""Throughput benchmark: simulation plus lockstep messaging, single-threaded.

Drives the full protocol path (encode -> decode -> service -> encode ->
decode) through an in-process loopback, one tick per cycle at the simulation
time step, and reports how much faster than real time it runs. Compares the
compiled and pure flight-dynamics kernels when both are available.
"""

import time

from .protocol.client import LockstepClient
from .protocol.messages import decode, encode
from .protocol.service import ServiceConfig, SimulationService
from .scenario import ScenarioConfig
from .simcore import fdm


class EncodedLoopback:
    """In-process transport that still pays for framing both ways."""

    def __init__(self, service):
        self.service = service
        self._inbox = []
        self.session = service.register(
            lambda m: self._inbox.append(encode(m)), label="bench")

    def send(self, msg):
        self.send_batch([msg])

    def send_batch(self, msgs):
        for m in msgs:
            self.service.handle_frame(self.session, encode(m))

    def recv(self, timeout=None):
        return decode(self._inbox.pop(0))

    def close(self):
        self.service.unregister(self.session)


def run_cycles(cycles: int, tick_dt: float = 0.1, seed: int = 0) -> float:
    """Run `cycles` one-tick lockstep cycles; returns elapsed wall seconds."""
    svc = SimulationService(ServiceConfig(
        tick_dt=tick_dt, seed=seed,
        scenario=ScenarioConfig(position_box=5000.0)))
    ctl = LockstepClient(EncodedLoopback(svc))
    ctl.reset(seed=seed)
    delta_ms = round(tick_dt * 1000.0)
    command = {"entity_id": "wingman", "altitude": 5000.0, "speed": 400.0, "course": 1.0}
    start = time.perf_counter()
    for _ in range(cycles):
        ctl.cycle([command], delta_ms=delta_ms)
    elapsed = time.perf_counter() - start
    ctl.close()
    return elapsed


def run_raw_ticks(ticks: int, tick_dt: float = 0.1, seed: int = 0) -> float:
    """World stepping alone (no protocol); isolates the FDM kernel cost."""
    import numpy as np

    from .scenario import build_world, sample_scenario

    scenario = sample_scenario(np.random.default_rng(seed),
                               ScenarioConfig(position_box=5000.0), seed=seed)
    world = build_world(scenario, tick_dt=tick_dt)
    start = time.perf_counter()
    for _ in range(ticks):
        world.advance()
    return time.perf_counter() - start


def run_benchmark(cycles: int = 20_000, tick_dt: float = 0.1, backends=None) -> dict:
    """-> {backend: {cycles, sim_seconds, wall_seconds, speedup, raw_ticks_per_s}}."""
    names = backends or fdm.available_backends()
    results = {}
    for name in names:
        fdm.select_backend(name)
        try:
            elapsed = run_cycles(cycles, tick_dt=tick_dt)
            raw_elapsed = run_raw_ticks(cycles, tick_dt=tick_dt)
        finally:
            fdm.select_backend("auto")
        sim_seconds = cycles * tick_dt
        results[name] = {
            "cycles": cycles,
            "sim_seconds": sim_seconds,
            "wall_seconds": elapsed,
            "speedup": sim_seconds / elapsed if elapsed > 0 else float("inf"),
            "raw_ticks_per_s": cycles / raw_elapsed if raw_elapsed > 0 else float("inf"),
        }
    return results


def format_report(results: dict) -> str:
    lines = ["backend   cycles   sim_s     wall_s    x-realtime  raw-ticks/s"]
    for name, r in results.items():
        lines.append(f"{name:<9} {r['cycles']:<8} {r['sim_seconds']:<9.1f} "
                     f"{r['wall_seconds']:<9.3f} {r['speedup']:<11.0f} "
                     f"{r['raw_ticks_per_s']:.0f}")
    return "\n".join(lines)
