"""Sessions, CSV persistence, task-step annotations and signal accounting."""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyFile,
    InconsistentMetadata,
    InvalidData,
    MalformedRow,
    OverlappingSteps,
    StepOutOfSession,
    StepsOutOfOrder,
    StorageError,
)
from .wire import MAX_VOLTAGE_MV, N_SENSORS, Hand, SensorReading

SESSION_COLUMNS = ("timestamp_ms", "user", "expertise", "hand", "session", "sensor", "voltage_mv")
STEP_COLUMNS = ("user", "hand", "session", "step", "start_ms", "end_ms")
MAX_SESSION_INDEX = 10
N_STEPS = 4
# Sample period assumed when a session has a single distinct timestamp.
NOMINAL_PERIOD_MS = 20


class Expertise(enum.Enum):
    EXPERT = "expert"
    INTERMEDIATE = "intermediate"
    NOVICE = "novice"


class HandRole(enum.Enum):
    DOMINANT = "dominant"
    NON_DOMINANT = "non-dominant"


# The expert operator is left-handed, the other two right-handed.
DEFAULT_DOMINANT_HAND = {
    Expertise.EXPERT: Hand.LEFT,
    Expertise.INTERMEDIATE: Hand.RIGHT,
    Expertise.NOVICE: Hand.RIGHT,
}


@dataclass(frozen=True)
class UserMeta:
    user_id: str
    expertise: Expertise
    dominant_hand: Hand

    @classmethod
    def default(cls, user_id: str, expertise: Expertise) -> UserMeta:
        return cls(user_id, expertise, DEFAULT_DOMINANT_HAND[expertise])

    def physical_hand(self, role: HandRole) -> Hand:
        if role is HandRole.DOMINANT:
            return self.dominant_hand
        return Hand.RIGHT if self.dominant_hand is Hand.LEFT else Hand.LEFT

    def role_of(self, hand: Hand) -> HandRole:
        return HandRole.DOMINANT if hand is self.dominant_hand else HandRole.NON_DOMINANT


@dataclass(frozen=True)
class StepSpan:
    step: int
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class StepAnnotations:
    spans: tuple[StepSpan, ...]

    @classmethod
    def from_tuples(cls, spans: Iterable[tuple[int, int, int]]) -> StepAnnotations:
        return cls(tuple(StepSpan(*s) for s in spans))

    def validate(self, session_end_ms: int | None = None) -> None:
        """Check ordering, overlap and (optionally) containment in ``[0, session_end_ms]``."""
        expected = 1
        for span in self.spans:
            if span.step != expected:
                raise StepsOutOfOrder(f"expected step {expected}, got step {span.step}")
            expected += 1
        if expected - 1 > N_STEPS:
            raise StepsOutOfOrder(f"at most {N_STEPS} steps, got {len(self.spans)}")
        for span in self.spans:
            if span.start_ms < 0 or (session_end_ms is not None and span.end_ms > session_end_ms):
                raise StepOutOfSession(
                    f"step {span.step} [{span.start_ms}, {span.end_ms}] ms outside session "
                    f"[0, {session_end_ms}] ms"
                )
            if not span.start_ms < span.end_ms:
                raise InvalidData(f"step {span.step}: start {span.start_ms} >= end {span.end_ms}")
        for prev, cur in zip(self.spans, self.spans[1:]):
            if cur.start_ms < prev.end_ms:
                raise OverlappingSteps(f"step {cur.step} starts before step {prev.step} ends")

    @property
    def duration_ms(self) -> int:
        if not self.spans:
            return 0
        return self.spans[-1].end_ms - self.spans[0].start_ms


@dataclass(frozen=True)
class Session:
    """One labeled recording: a user, one hand, one session index."""

    user: UserMeta
    hand: HandRole
    session_index: int
    readings: tuple[SensorReading, ...] = ()
    steps: StepAnnotations | None = None

    def __post_init__(self):
        if not isinstance(self.readings, tuple):
            object.__setattr__(self, "readings", tuple(self.readings))
        if self.session_index < 1:
            raise InvalidData(f"session_index must be >= 1, got {self.session_index}")
        physical = self.physical_hand
        prev = -1
        for r in self.readings:
            if r.hand is not physical:
                raise InconsistentMetadata(
                    f"reading on {r.hand.name} hand in a {self.hand.value} "
                    f"({physical.name}) session"
                )
            if r.timestamp_ms < prev:
                raise InvalidData("readings must be non-decreasing in timestamp_ms")
            prev = r.timestamp_ms

    @property
    def physical_hand(self) -> Hand:
        return self.user.physical_hand(self.hand)

    @property
    def key(self) -> tuple[str, HandRole, int]:
        return (self.user.user_id, self.hand, self.session_index)

    @cached_property
    def tick_ms(self) -> int:
        """Smallest positive gap between timestamps (the sample period)."""
        stamps = sorted({r.timestamp_ms for r in self.readings})
        gaps = [b - a for a, b in zip(stamps, stamps[1:])]
        return min(gaps) if gaps else NOMINAL_PERIOD_MS

    @property
    def end_ms(self) -> int:
        """Session end: one sample period past the last timestamp."""
        if not self.readings:
            return 0
        return self.readings[-1].timestamp_ms + self.tick_ms

    @property
    def task_time_s(self) -> float:
        """Task execution time: annotated step extent if present, else the recording span."""
        if self.steps is not None and self.steps.spans:
            return self.steps.duration_ms / 1000.0
        return self.end_ms / 1000.0

    def sensor_voltages(self, sensor_id: int) -> list[int]:
        return [r.voltage_mv for r in self.readings if r.sensor_id == sensor_id]


def attach_steps(session: Session, annotations: StepAnnotations) -> Session:
    annotations.validate(session.end_ms)
    return replace(session, steps=annotations)


# -- CSV persistence -------------------------------------------------------

def _int_field(row: Mapping[str, str], name: str, line: int) -> int:
    raw = row.get(name)
    if raw is None or raw == "":
        raise MalformedRow(line, f"missing {name}")
    try:
        return int(raw, 10)
    except ValueError:
        raise MalformedRow(line, f"{name}={raw!r} is not a base-10 integer") from None


def _open_rows(path, columns: Sequence[str]):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise EmptyFile(f"{path} is empty")
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if tuple(reader.fieldnames or ()) != tuple(columns):
        raise MalformedRow(1, f"header must be {','.join(columns)}, got {reader.fieldnames}")
    return reader


def load_session_csv(
    path,
    dominant_hands: Mapping[str, Hand] | None = None,
    max_session_index: int = MAX_SESSION_INDEX,
) -> Session:
    """Load one user/hand/session CSV.

    ``hand`` in the file is the physical hand; it is resolved to a
    dominant/non-dominant role via ``dominant_hands[user]`` or, failing
    that, the default handedness of the user's expertise level.
    """
    reader = _open_rows(path, SESSION_COLUMNS)
    dominant_hands = dominant_hands or {}
    meta = None
    readings = []
    for row in reader:
        line = reader.line_num
        if None in row or any(v is None for v in row.values()):
            raise MalformedRow(line, "wrong number of fields")
        try:
            expertise = Expertise(row["expertise"])
        except ValueError:
            raise MalformedRow(line, f"unknown expertise {row['expertise']!r}") from None
        try:
            hand = Hand(row["hand"])
        except ValueError:
            raise MalformedRow(line, f"hand must be L or R, got {row['hand']!r}") from None
        session_index = _int_field(row, "session", line)
        if not 1 <= session_index <= max_session_index:
            raise MalformedRow(line, f"session {session_index} outside 1..{max_session_index}")
        sensor = _int_field(row, "sensor", line)
        if not 1 <= sensor <= N_SENSORS:
            raise MalformedRow(line, f"sensor {sensor} outside 1..{N_SENSORS}")
        voltage = _int_field(row, "voltage_mv", line)
        if not 0 <= voltage <= MAX_VOLTAGE_MV:
            raise MalformedRow(line, f"voltage_mv {voltage} outside 0..{MAX_VOLTAGE_MV}")
        timestamp = _int_field(row, "timestamp_ms", line)
        if timestamp < 0:
            raise MalformedRow(line, f"negative timestamp {timestamp}")

        row_meta = (row["user"], expertise, hand, session_index)
        if meta is None:
            meta = row_meta
        elif row_meta != meta:
            raise InconsistentMetadata(f"line {line}: {row_meta} differs from {meta}")
        try:
            readings.append(SensorReading(sensor, hand, timestamp, voltage))
        except InvalidData as exc:
            raise MalformedRow(line, str(exc)) from None
    if meta is None:
        raise EmptyFile(f"{path} has a header but no readings")

    user_id, expertise, hand, session_index = meta
    dominant = dominant_hands.get(user_id, DEFAULT_DOMINANT_HAND[expertise])
    user = UserMeta(user_id, expertise, dominant)
    readings.sort(key=lambda r: r.timestamp_ms)
    return Session(user, user.role_of(hand), session_index, tuple(readings))


def save_session_csv(session: Session, path) -> None:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SESSION_COLUMNS)
    user = session.user
    for r in session.readings:
        writer.writerow((
            r.timestamp_ms, user.user_id, user.expertise.value, r.hand.value,
            session.session_index, r.sensor_id, r.voltage_mv,
        ))
    _write_text(path, buf.getvalue())


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


StepKey = tuple[str, Hand, int]


def load_steps_csv(path) -> dict[StepKey, StepAnnotations]:
    """Read a step-annotation CSV into annotations keyed by (user, physical hand, session)."""
    reader = _open_rows(path, STEP_COLUMNS)
    grouped: dict[StepKey, list[StepSpan]] = defaultdict(list)
    for row in reader:
        line = reader.line_num
        try:
            hand = Hand(row["hand"])
        except ValueError:
            raise MalformedRow(line, f"hand must be L or R, got {row['hand']!r}") from None
        key = (row["user"], hand, _int_field(row, "session", line))
        grouped[key].append(StepSpan(
            _int_field(row, "step", line),
            _int_field(row, "start_ms", line),
            _int_field(row, "end_ms", line),
        ))
    out = {}
    for key, spans in grouped.items():
        ann = StepAnnotations(tuple(spans))
        ann.validate()
        out[key] = ann
    return out


def save_steps_csv(sessions: Iterable[Session], path) -> None:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STEP_COLUMNS)
    for s in sessions:
        if s.steps is None:
            continue
        for span in s.steps.spans:
            writer.writerow((s.user.user_id, s.physical_hand.value, s.session_index,
                             span.step, span.start_ms, span.end_ms))
    _write_text(path, buf.getvalue())


def load_session_dir(path, dominant_hands: Mapping[str, Hand] | None = None) -> list[Session]:
    """Load every session CSV in a directory and attach any step-annotation CSVs found.

    Files are told apart by their header line. Sessions come back sorted by
    (user, hand role, session index).
    """
    root = Path(path)
    if not root.is_dir():
        raise StorageError(f"{root} is not a directory")
    sessions = []
    steps: dict[StepKey, StepAnnotations] = {}
    for csv_path in sorted(root.glob("*.csv")):
        try:
            with open(csv_path, encoding="utf-8") as fh:
                header = fh.readline().strip()
        except OSError as exc:
            raise StorageError(f"cannot read {csv_path}: {exc}") from exc
        if header == ",".join(STEP_COLUMNS):
            steps.update(load_steps_csv(csv_path))
        elif header == ",".join(SESSION_COLUMNS):
            sessions.append(load_session_csv(csv_path, dominant_hands))
    seen = set()
    out = []
    for s in sessions:
        if s.key in seen:
            raise InconsistentMetadata(f"duplicate session {s.key}")
        seen.add(s.key)
        ann = steps.get((s.user.user_id, s.physical_hand, s.session_index))
        out.append(attach_steps(s, ann) if ann is not None else s)
    out.sort(key=lambda s: (s.user.user_id, s.hand.value, s.session_index))
    return out


def session_filename(session: Session) -> str:
    return f"{session.user.user_id}_{session.physical_hand.value}_s{session.session_index:02d}.csv"


# -- accounting ------------------------------------------------------------

CellKey = tuple[str, HandRole]


@dataclass
class SignalCounts:
    """Reading counts keyed by (user, hand role, sensor)."""

    counts: Counter = field(default_factory=Counter)

    @classmethod
    def from_cell_counts(cls, per_sensor: Mapping[CellKey, int],
                         sensors: Iterable[int] = range(1, N_SENSORS + 1)) -> SignalCounts:
        """Counts for cells whose every sensor saw the same number of signals."""
        sensors = list(sensors)
        return cls(Counter({(user, hand, s): n for (user, hand), n in per_sensor.items()
                            for s in sensors}))

    @property
    def grand_total(self) -> int:
        return sum(self.counts.values())

    def per_sensor(self) -> dict[int, int]:
        out: Counter = Counter()
        for (_, _, sensor), n in self.counts.items():
            out[sensor] += n
        return dict(sorted(out.items()))

    def per_cell(self) -> dict[CellKey, int]:
        totals: Counter = Counter()
        for (user, hand, _), n in self.counts.items():
            totals[(user, hand)] += n
        return {k: totals[k] for k in sorted(totals, key=lambda k: (k[0], k[1].value))}

    def is_sensor_uniform(self) -> bool:
        by_cell: dict[CellKey, set] = defaultdict(set)
        for (user, hand, _), n in self.counts.items():
            by_cell[(user, hand)].add(n)
        return all(len(v) == 1 for v in by_cell.values())

    def to_dict(self) -> dict:
        return {
            "grand_total": self.grand_total,
            "per_sensor": {str(k): v for k, v in self.per_sensor().items()},
            "cells": [
                {"user": u, "hand": h.value, "sensor": s, "count": n}
                for (u, h, s), n in sorted(self.counts.items(),
                                           key=lambda kv: (kv[0][0], kv[0][1].value, kv[0][2]))
            ],
        }


def count_signals(sessions: Iterable[Session]) -> SignalCounts:
    counts: Counter = Counter()
    for s in sessions:
        for r in s.readings:
            counts[(s.user.user_id, s.hand, r.sensor_id)] += 1
    return SignalCounts(counts)


@dataclass
class TotalForceTable:
    """Summed voltages in volts: rows are sensors, columns (user, hand role)."""

    columns: list[CellKey]
    values: dict[tuple[int, CellKey], float]

    def entry(self, sensor: int, column: CellKey) -> float:
        return self.values.get((sensor, column), 0.0)

    def column_total(self, column: CellKey) -> float:
        return sum(self.entry(s, column) for s in range(1, N_SENSORS + 1))

    def to_dict(self) -> dict:
        return {
            "unit": "V",
            "columns": [f"{u}/{h.value}" for u, h in self.columns],
            "rows": [
                {"sensor": s, "values": [self.entry(s, c) for c in self.columns]}
                for s in range(1, N_SENSORS + 1)
            ],
            "totals": [self.column_total(c) for c in self.columns],
        }


def total_force_table(sessions: Iterable[Session]) -> TotalForceTable:
    sums_mv: Counter = Counter()
    columns = set()
    for s in sessions:
        col = (s.user.user_id, s.hand)
        columns.add(col)
        for r in s.readings:
            sums_mv[(r.sensor_id, col)] += r.voltage_mv
    # Integer millivolt sums are exact; divide once at the end.
    values = {k: v / 1000.0 for k, v in sums_mv.items()}
    ordered = sorted(columns, key=lambda c: (c[0], c[1].value))
    return TotalForceTable(ordered, values)
