"""Windowed grip-force profiles, task-step overlays and the S5/S6/S7 comparison."""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .datamodel import Expertise, HandRole, Session, StepAnnotations
from .errors import BoundaryBeyondProfile, EmptyInput, InvalidData
from .stats import AnovaTable, ModelSpec, SummaryStats, fit_anova_columns, summary_stats
from .wire import SensorReading

DEFAULT_WINDOW = 100
DEFAULT_RATE_HZ = 50.0
TRIO_SENSORS = (5, 6, 7)
STATISTICS = ("mean", "max")


@dataclass(frozen=True)
class ProfilePoint:
    window_index: int
    mean_mv: float  # the window statistic; a maximum when the profile uses "max"
    n_samples: int


@dataclass(frozen=True)
class ProfileSeries:
    sensor_id: int
    window_size: int
    points: tuple[ProfilePoint, ...]
    step_boundaries: tuple[tuple[int, float], ...] = ()
    statistic: str = "mean"
    timestamps_ms: tuple[int, ...] = field(default=(), compare=False, repr=False)

    @property
    def n_samples(self) -> int:
        return sum(p.n_samples for p in self.points)

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("window_index", "mean_mv", "n_samples"))
        for p in self.points:
            writer.writerow((p.window_index, f"{p.mean_mv:.6f}", p.n_samples))
        return buf.getvalue()


def window_values(values: Sequence[float], window_size: int = DEFAULT_WINDOW,
                  statistic: str = "mean") -> list[ProfilePoint]:
    if window_size < 1:
        raise InvalidData(f"window_size must be >= 1, got {window_size}")
    if statistic not in STATISTICS:
        raise InvalidData(f"statistic must be one of {STATISTICS}, got {statistic!r}")
    if not values:
        raise EmptyInput("cannot build a profile from zero samples")
    points = []
    for k, start in enumerate(range(0, len(values), window_size)):
        chunk = values[start:start + window_size]
        value = math.fsum(chunk) / len(chunk) if statistic == "mean" else float(max(chunk))
        points.append(ProfilePoint(k, value, len(chunk)))
    return points


def build_profile(readings: Sequence[SensorReading], window_size: int = DEFAULT_WINDOW,
                  statistic: str = "mean") -> ProfileSeries:
    """Average consecutive, non-overlapping windows of one sensor's samples.

    The last window may be partial; its ``n_samples`` says how many samples
    it holds.
    """
    if not readings:
        raise EmptyInput("cannot build a profile from zero samples")
    sensors = {r.sensor_id for r in readings}
    if len(sensors) != 1:
        raise InvalidData(f"profile readings must come from one sensor, got {sorted(sensors)}")
    stamps = tuple(r.timestamp_ms for r in readings)
    if any(b < a for a, b in zip(stamps, stamps[1:])):
        raise InvalidData("profile readings must be sorted by timestamp")
    points = window_values([r.voltage_mv for r in readings], window_size, statistic)
    return ProfileSeries(sensors.pop(), window_size, tuple(points), statistic=statistic,
                         timestamps_ms=stamps)


def session_profile(session: Session, sensor_id: int, window_size: int = DEFAULT_WINDOW,
                    statistic: str = "mean") -> ProfileSeries:
    readings = [r for r in session.readings if r.sensor_id == sensor_id]
    if not readings:
        raise EmptyInput(f"sensor S{sensor_id} has no readings in session {session.key}")
    return build_profile(readings, window_size, statistic)


def boundary_index(t_ms: float, window_size: int, sample_rate_hz: float = DEFAULT_RATE_HZ) -> float:
    """Fractional window index of time ``t_ms`` at the nominal sample rate."""
    if not sample_rate_hz > 0:
        raise InvalidData(f"sample_rate_hz must be > 0, got {sample_rate_hz}")
    return t_ms * sample_rate_hz / 1000.0 / window_size


def overlay_steps(profile: ProfileSeries, annotations: StepAnnotations,
                  sample_rate_hz: float = DEFAULT_RATE_HZ, mode: str = "nominal") -> ProfileSeries:
    """Attach each step's end as a fractional window index.

    ``nominal`` converts a boundary time with the nominal sample rate,
    ``timestamp`` counts the samples recorded before it, for irregular
    streams.
    """
    if not sample_rate_hz > 0:
        raise InvalidData(f"sample_rate_hz must be > 0, got {sample_rate_hz}")
    if mode not in ("nominal", "timestamp"):
        raise InvalidData(f"mode must be 'nominal' or 'timestamp', got {mode!r}")
    annotations.validate()
    n = profile.n_samples
    stamps = profile.timestamps_ms
    if mode == "timestamp" and len(stamps) != n:
        raise InvalidData("timestamp mode needs a profile built from timestamped readings")
    boundaries = []
    for span in annotations.spans:
        t = span.end_ms
        if mode == "nominal":
            position = boundary_index(t, 1, sample_rate_hz)
        else:
            if t > stamps[-1] + 1000.0 / sample_rate_hz:
                position = math.inf
            else:
                position = bisect.bisect_left(stamps, t)
        if position > n:
            raise BoundaryBeyondProfile(
                f"step {span.step} ends at {t} ms, beyond the {n}-sample profile"
            )
        boundaries.append((span.step, position / profile.window_size))
    return replace(profile, step_boundaries=tuple(boundaries))


# -- representative sensors ------------------------------------------------

@dataclass(frozen=True)
class TrioSensorResult:
    sensor_id: int
    # keyed by (user_id, "first" | "last")
    cells: dict[tuple[str, str], SummaryStats]
    anova: AnovaTable

    @property
    def interaction(self):
        return self.anova.row("user:session")

    def to_dict(self) -> dict:
        return {
            "sensor": self.sensor_id,
            "cells": [{"user": u, "session": s, **st.to_dict()}
                      for (u, s), st in sorted(self.cells.items())],
            "anova": self.anova.to_dict(),
        }


@dataclass(frozen=True)
class TrioReport:
    users: tuple[str, str]
    session_indices: dict[str, tuple[int, int]]
    sensors: tuple[TrioSensorResult, ...]

    def sensor(self, sensor_id: int) -> TrioSensorResult:
        for s in self.sensors:
            if s.sensor_id == sensor_id:
                return s
        raise KeyError(sensor_id)

    def to_dict(self) -> dict:
        return {
            "users": list(self.users),
            "sessions": {u: list(v) for u, v in sorted(self.session_indices.items())},
            "sensors": [s.to_dict() for s in self.sensors],
        }

    def format_text(self) -> str:
        u1, u2 = self.users
        lines = [f"Sensor  Session  {u1} (Mean/SEM)  {u2} (Mean/SEM)  Interaction"]
        for res in self.sensors:
            row = res.interaction
            for k, phase in enumerate(("first", "last")):
                a, b = res.cells[(u1, phase)], res.cells[(u2, phase)]
                tail = (f"F({row.df},{res.anova.residual.df}) = {row.f:.2f}; "
                        f"p {'< 0.001' if row.p < 0.001 else f'= {row.p:.4f}'}") if k == 0 else ""
                label = f"S{res.sensor_id}" if k == 0 else ""
                lines.append(f"{label:<6}  {phase:<7}  {_ms(a):>18}  {_ms(b):>18}  {tail}".rstrip())
        return "\n".join(lines) + "\n"


def _ms(st: SummaryStats) -> str:
    sem = f"{st.sem:.2f}" if st.sd is not None else "n/a"
    return f"{st.mean:.2f} / {sem}"


def trio_comparison(sessions: Sequence[Session], sensors: Sequence[int] = TRIO_SENSORS) -> TrioReport:
    """Two users' first and last dominant-hand sessions, compared per sensor.

    For each sensor: cell mean/SEM over raw samples and a user x session
    ANOVA with interaction.
    """
    by_user: dict[str, list[Session]] = {}
    for s in sessions:
        if s.hand is not HandRole.DOMINANT:
            raise InvalidData(f"session {s.key} is not a dominant-hand session")
        by_user.setdefault(s.user.user_id, []).append(s)
    if len(by_user) != 2:
        raise InvalidData(f"need exactly two users, got {sorted(by_user)}")
    indices = {}
    for user, group in by_user.items():
        idx = sorted(s.session_index for s in group)
        if len(idx) != 2 or idx[0] == idx[1]:
            raise InvalidData(f"user {user} needs exactly two distinct sessions, got {idx}")
        indices[user] = (idx[0], idx[1])
    users = tuple(sorted(by_user))
    spec = ModelSpec.pairwise(("user", "session"))

    results = []
    for sensor in sensors:
        values, user_col, phase_col = [], [], []
        cells = {}
        for user in users:
            for s in sorted(by_user[user], key=lambda s: s.session_index):
                phase = "first" if s.session_index == indices[user][0] else "last"
                v = s.sensor_voltages(sensor)
                if not v:
                    raise InvalidData(f"sensor S{sensor} missing from session {s.key}")
                cells[(user, phase)] = summary_stats(v)
                values.extend(v)
                user_col.extend([user] * len(v))
                phase_col.extend([phase] * len(v))
        anova = fit_anova_columns(values, {"user": user_col, "session": phase_col}, spec)
        results.append(TrioSensorResult(sensor, cells, anova))
    return TrioReport(users, indices, tuple(results))


def select_trio_sessions(sessions: Sequence[Session], users: Sequence[str] | None = None
                         ) -> list[Session]:
    """First and last dominant-hand sessions for two users (default: expert and novice)."""
    dominant = [s for s in sessions if s.hand is HandRole.DOMINANT]
    if users is None:
        picked = []
        for level in (Expertise.EXPERT, Expertise.NOVICE):
            ids = sorted({s.user.user_id for s in dominant if s.user.expertise is level})
            if len(ids) != 1:
                raise InvalidData(f"expected one {level.value} user, found {ids}")
            picked.append(ids[0])
        users = picked
    out = []
    for user in users:
        mine = sorted((s for s in dominant if s.user.user_id == user), key=lambda s: s.session_index)
        if len(mine) < 2:
            raise InvalidData(f"user {user} has fewer than two dominant-hand sessions")
        out.extend([mine[0], mine[-1]])
    return out
