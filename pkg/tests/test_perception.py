"""Navigation/sensor/fusion subsystem behavior."""

import math

import numpy as np
import pytest

from aircombat.simcore import DynamicState, Entity, PerceivedState, Source, WorldState
from aircombat.simcore.perception import NavigationNoise, SensorConfig, fuse, perceive_own, sense


def make_world(entities):
    w = WorldState(tick_dt=0.1, seed=42)
    for e in entities:
        w.add_entity(e)
    return w


def plane(eid, x=0.0, y=0.0, course=0.0, speed=300.0, **kw):
    return Entity(eid, DynamicState(x=x, y=y, alt=5000.0, course=course, speed=speed), **kw)


class TestPerceiveOwn:
    def test_zero_noise_equals_ground_truth(self):
        s = DynamicState(x=1.0, y=2.0, alt=3.0, course=0.4, speed=305.0)
        p = perceive_own("a", s, NavigationNoise(), np.random.default_rng(0), 12.5)
        assert (p.x, p.y, p.alt, p.course, p.speed) == (1.0, 2.0, 3.0, 0.4, 305.0)
        assert p.source is Source.NAVIGATION and p.perceived_at == 12.5

    def test_seeded_noise_reproducible(self):
        s = DynamicState(speed=300.0)
        noise = NavigationNoise(speed=1.0)
        a = perceive_own("a", s, noise, np.random.default_rng(7), 0.0)
        b = perceive_own("a", s, noise, np.random.default_rng(7), 0.0)
        assert a.speed == b.speed != 300.0

    def test_noise_variance_matches_configuration(self):
        # 10,000 draws: sample variance within 10% of the configured one.
        rng = np.random.default_rng(3)
        noise = NavigationNoise(speed=2.0)
        s = DynamicState(speed=300.0)
        draws = np.array([
            perceive_own("a", s, noise, rng, 0.0).speed - 300.0
            for _ in range(10_000)
        ])
        assert abs(draws.var() - 4.0) < 0.4


class TestSense:
    cfg = SensorConfig(max_range=20_000.0, half_fov=math.pi / 3)

    def test_single_entity_world_sees_nothing(self):
        w = make_world([plane("solo", sensor=self.cfg)])
        assert sense(w, "solo", self.cfg) == []

    def test_target_dead_ahead_detected(self):
        w = make_world([plane("own", course=0.0), plane("tgt", y=10_000.0)])
        tracks = sense(w, "own", self.cfg)
        assert [t.subject_id for t in tracks] == ["tgt"]
        assert tracks[0].source is Source.SENSOR
        assert tracks[0].perceived_at == w.sim_time

    def test_target_beyond_range_missed(self):
        w = make_world([plane("own"), plane("tgt", y=10_000.0)])
        assert sense(w, "own", SensorConfig(max_range=5_000.0, half_fov=math.pi / 3)) == []

    def test_target_outside_fov_missed(self):
        # Due east while looking north with a 60-degree half-FOV: detected;
        # with a 45-degree half-FOV at bearing 90 degrees: missed.
        w = make_world([plane("own", course=0.0), plane("tgt", x=10_000.0)])
        assert sense(w, "own", SensorConfig(20_000.0, math.pi / 2)) != []
        assert sense(w, "own", SensorConfig(20_000.0, math.pi / 4)) == []

    def test_unknown_owner_rejected(self):
        w = make_world([plane("own")])
        with pytest.raises(KeyError):
            sense(w, "ghost", self.cfg)


def track(subject, t, source, speed=300.0):
    return PerceivedState(subject_id=subject, x=0.0, y=0.0, alt=5000.0,
                          course=0.0, speed=speed, perceived_at=t, source=source)


class TestFuse:
    def test_disjoint_subjects_concatenate(self):
        a = [track("x", 1.0, Source.SENSOR)]
        b = [track("y", 2.0, Source.DATALINK)]
        fused = fuse(a, b)
        assert {t.subject_id for t in fused} == {"x", "y"}

    def test_latest_timestamp_wins(self):
        own = [track("x", 10.0, Source.NAVIGATION)]
        linked = [track("x", 12.0, Source.DATALINK)]
        (kept,) = fuse(own, linked)
        assert kept.source is Source.DATALINK and kept.perceived_at == 12.0

    def test_equal_timestamps_break_by_source_priority(self):
        (kept,) = fuse([track("x", 5.0, Source.SENSOR)], [track("x", 5.0, Source.DATALINK)])
        assert kept.source is Source.SENSOR
        (kept,) = fuse([track("x", 5.0, Source.NAVIGATION)], [track("x", 5.0, Source.SENSOR)])
        assert kept.source is Source.NAVIGATION

    def test_idempotent(self):
        a = [track("x", 1.0, Source.SENSOR), track("y", 3.0, Source.NAVIGATION)]
        b = [track("x", 2.0, Source.DATALINK), track("z", 1.0, Source.DATALINK)]
        once = fuse(a, b)
        again = fuse(once, [])
        assert sorted(once, key=lambda t: t.subject_id) == sorted(again, key=lambda t: t.subject_id)

    def test_no_duplicate_subjects(self):
        rng = np.random.default_rng(11)
        sources = list(Source)
        tracks = [track(f"e{rng.integers(5)}", float(rng.integers(20)),
                        sources[rng.integers(3)]) for _ in range(200)]
        fused = fuse(tracks[:100], tracks[100:])
        ids = [t.subject_id for t in fused]
        assert len(ids) == len(set(ids))
