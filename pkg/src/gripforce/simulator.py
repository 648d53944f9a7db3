"""Deterministic synthetic glove sessions and paced frame emission.

Archetype levels are synthetic: per-sample sensor means come from the
reference per-sensor voltage totals divided by the signal counts, with
the dominant-hand S5/S6/S7 levels of the expert and novice taken from the
first-session cell means. Nothing here models real grip biomechanics.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import BinaryIO, Sequence

import numpy as np

from . import reference_data as ref
from .datamodel import (
    MAX_SESSION_INDEX,
    N_STEPS,
    Expertise,
    HandRole,
    Session,
    StepAnnotations,
    StepSpan,
    UserMeta,
)
from .errors import InvalidConfig, SinkError
from .wire import MAX_VOLTAGE_MV, N_SENSORS, SensorReading, encode_frame

DEFAULT_RATE_HZ = 50.0
ALL_SENSORS = tuple(range(1, N_SENSORS + 1))
# Jitter for cells without a reference SEM, as a fraction of the level.
DEFAULT_JITTER_CV = 0.25


@dataclass(frozen=True)
class Archetype:
    name: Expertise
    levels: dict[HandRole, tuple[float, ...]]  # mV, sensors S1..S12
    jitter: dict[HandRole, tuple[float, ...]]  # mV standard deviation
    step_multipliers: tuple[float, float, float, float]
    step_fractions: tuple[float, float, float, float]
    task_time_s: dict[HandRole, tuple[float, float]] = field(default_factory=dict)  # (mean, sd)

    def __post_init__(self):
        for role in HandRole:
            levels, jitter = self.levels.get(role), self.jitter.get(role)
            if levels is None or jitter is None:
                raise InvalidConfig(f"{self.name.value}: missing levels/jitter for {role.value}")
            if len(levels) != N_SENSORS or len(jitter) != N_SENSORS:
                raise InvalidConfig(f"{self.name.value}: need {N_SENSORS} levels and jitters")
            if any(not 0 <= v <= MAX_VOLTAGE_MV for v in levels):
                raise InvalidConfig(f"{self.name.value}: levels must lie in [0, {MAX_VOLTAGE_MV}]")
            if any(j < 0 for j in jitter):
                raise InvalidConfig(f"{self.name.value}: jitter must be >= 0")
        if len(self.step_multipliers) != N_STEPS or any(m < 0 for m in self.step_multipliers):
            raise InvalidConfig("need four non-negative step multipliers")
        if len(self.step_fractions) != N_STEPS or any(f <= 0 for f in self.step_fractions):
            raise InvalidConfig("need four positive step duration fractions")
        if abs(sum(self.step_fractions) - 1.0) > 1e-9:
            raise InvalidConfig(f"step fractions sum to {sum(self.step_fractions)}, not 1")


def _default_archetype(level: Expertise, multipliers, fractions) -> Archetype:
    levels, jitter, times = {}, {}, {}
    for role in HandRole:
        count = ref.SIGNALS_PER_SENSOR[(level, role)]
        lv = [v * 1000.0 / count for v in ref.TOTAL_FORCE_V[(level, role)]]
        jt = [DEFAULT_JITTER_CV * v for v in lv]
        if role is HandRole.DOMINANT:
            for sensor in (5, 6, 7):
                cell = ref.TRIO_CELLS.get((level, sensor))
                if cell is not None:
                    mean, sem = cell["first"]
                    lv[sensor - 1] = mean
                    jt[sensor - 1] = sem * math.sqrt(ref.TRIO_TOTAL_SAMPLES / 4)
        levels[role] = tuple(lv)
        jitter[role] = tuple(jt)
        mean_t, sem_t = ref.TASK_TIME_S[(level, role)]
        times[role] = (mean_t, sem_t * math.sqrt(MAX_SESSION_INDEX))
    return Archetype(level, levels, jitter, multipliers, fractions, times)


ARCHETYPES = {
    Expertise.EXPERT: _default_archetype(
        Expertise.EXPERT, (1.0, 1.15, 0.95, 0.9), (0.35, 0.25, 0.25, 0.15)),
    Expertise.INTERMEDIATE: _default_archetype(
        Expertise.INTERMEDIATE, (1.05, 1.15, 0.95, 0.85), (0.4, 0.25, 0.2, 0.15)),
    Expertise.NOVICE: _default_archetype(
        Expertise.NOVICE, (1.1, 1.2, 0.9, 0.8), (0.5, 0.2, 0.2, 0.1)),
}


@dataclass(frozen=True)
class SimConfig:
    archetype: Archetype
    hand: HandRole = HandRole.DOMINANT
    seed: int = 0
    duration_s: float = 10.0
    sample_rate_hz: float = DEFAULT_RATE_HZ
    sensors: tuple[int, ...] = ALL_SENSORS
    user_id: str | None = None
    session_index: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.duration_s > 0:
            raise InvalidConfig(f"duration_s must be > 0, got {self.duration_s}")
        if not self.sample_rate_hz > 0:
            raise InvalidConfig(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        if not self.sensors:
            raise InvalidConfig("at least one sensor must be active")
        if len(set(self.sensors)) != len(self.sensors) or any(
                not 1 <= s <= N_SENSORS for s in self.sensors):
            raise InvalidConfig(f"sensors must be distinct ids in 1..{N_SENSORS}")
        if not 1 <= self.session_index <= MAX_SESSION_INDEX:
            raise InvalidConfig(f"session_index must lie in 1..{MAX_SESSION_INDEX}")

    @property
    def n_ticks(self) -> int:
        # Tolerance keeps e.g. 0.3 s * 50 Hz from flooring to 14.
        return math.floor(self.duration_s * self.sample_rate_hz + 1e-9)

    @property
    def user(self) -> UserMeta:
        return UserMeta.default(self.user_id or self.archetype.name.value, self.archetype.name)


def _tick_ms(k, rate: float):
    return np.rint(np.asarray(k, dtype=float) * 1000.0 / rate).astype(np.int64)


def generate_session(config: SimConfig) -> Session:
    """Synthesize one session with step annotations.

    Every active sensor gets one sample per tick; values are the archetype
    level times the current step's multiplier plus seeded Gaussian jitter,
    rounded and clamped to [0, 3300] mV.
    """
    n = config.n_ticks
    if n < N_STEPS:
        raise InvalidConfig(f"{n} ticks cannot hold {N_STEPS} task steps")
    arch = config.archetype
    sensors = tuple(sorted(config.sensors))
    idx = [s - 1 for s in sensors]
    level = np.asarray(arch.levels[config.hand])[idx]
    jitter = np.asarray(arch.jitter[config.hand])[idx]

    bounds = np.rint(np.cumsum((0.0,) + arch.step_fractions) * n).astype(np.int64).tolist()
    bounds[0], bounds[-1] = 0, n
    # every step keeps at least one tick
    for k in range(1, N_STEPS):
        bounds[k] = max(bounds[k], bounds[k - 1] + 1)
    for k in range(N_STEPS - 1, 0, -1):
        bounds[k] = min(bounds[k], bounds[k + 1] - 1)
    bounds = np.asarray(bounds, dtype=np.int64)
    step_of_tick = np.searchsorted(bounds[1:], np.arange(n), side="right")
    multiplier = np.asarray(arch.step_multipliers)[step_of_tick]

    rng = np.random.default_rng(config.seed)
    noise = rng.standard_normal((n, len(sensors))) * jitter
    values = np.clip(np.rint(multiplier[:, None] * level[None, :] + noise), 0, MAX_VOLTAGE_MV)
    values = values.astype(np.int64)
    stamps = _tick_ms(np.arange(n), config.sample_rate_hz)

    user = config.user
    hand = user.physical_hand(config.hand)
    readings = tuple(
        SensorReading(sensor, hand, int(t), int(v))
        for t, row in zip(stamps.tolist(), values.tolist())
        for sensor, v in zip(sensors, row)
    )
    session = Session(user, config.hand, config.session_index, readings)

    edges = _tick_ms(bounds, config.sample_rate_hz).tolist()
    edges[-1] = session.end_ms
    spans = tuple(StepSpan(k + 1, edges[k], edges[k + 1]) for k in range(N_STEPS))
    steps = StepAnnotations(spans)
    steps.validate(session.end_ms)
    return Session(user, config.hand, config.session_index, readings, steps)


def _derive_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(1, np.uint64)[0])


def generate_study(
    seed: int,
    archetypes: Sequence[Expertise] = tuple(Expertise),
    sessions: int = MAX_SESSION_INDEX,
    sample_rate_hz: float = DEFAULT_RATE_HZ,
    sensors: tuple[int, ...] = ALL_SENSORS,
) -> list[Session]:
    """Every archetype x hand role x session, with per-session task times drawn
    around each archetype's reference mean/SEM."""
    out = []
    for a, level in enumerate(archetypes):
        arch = ARCHETYPES[level]
        for h, role in enumerate(HandRole):
            mean_t, sd_t = arch.task_time_s[role]
            for s in range(1, sessions + 1):
                sub = _derive_seed(seed, a, h, s)
                draw = np.random.default_rng(_derive_seed(sub, 0)).standard_normal()
                duration = max(float(mean_t + sd_t * draw), 1.0)
                duration = round(duration * sample_rate_hz) / sample_rate_hz
                cfg = SimConfig(arch, role, sub, duration, sample_rate_hz, sensors,
                                session_index=s)
                out.append(generate_session(cfg))
    return out


@dataclass
class EmissionReport:
    frames_written: int = 0
    duration_s: float = 0.0

    def to_dict(self) -> dict:
        return {"frames_written": self.frames_written, "duration_s": round(self.duration_s, 6)}


def emit_stream(session: Session, sink: BinaryIO, timed: bool = False) -> EmissionReport:
    """Write every reading as a frame, in timestamp order.

    In timed mode each frame is held until its timestamp on a wall clock
    started at the first write, and the call returns at the session end.
    Untimed mode writes as fast as the sink accepts. Bytes are identical
    in both modes.
    """
    report = EmissionReport()
    start = time.monotonic()
    flush = getattr(sink, "flush", None)
    try:
        for r in sorted(session.readings, key=lambda r: r.timestamp_ms):
            if timed:
                delay = start + r.timestamp_ms / 1000.0 - time.monotonic()
                if delay > 0:
                    if flush is not None:
                        flush()
                    time.sleep(delay)
            sink.write(encode_frame(r))
            report.frames_written += 1
        if flush is not None:
            flush()
        if timed:
            delay = start + session.end_ms / 1000.0 - time.monotonic()
            if delay > 0:
                time.sleep(delay)
    except (OSError, ValueError) as exc:
        report.duration_s = time.monotonic() - start
        raise SinkError(f"sink failed after {report.frames_written} frames: {exc}", report) from exc
    report.duration_s = time.monotonic() - start
    return report
