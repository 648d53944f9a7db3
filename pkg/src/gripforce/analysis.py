"""Session collections to ANOVA inputs and summary tables."""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

import numpy as np

from .datamodel import Session
from .errors import EmptyInput, InvalidData
from .stats import AnovaTable, ModelSpec, SummaryStats, fit_anova_columns, summary_stats

TIME_MODEL = ModelSpec.pairwise(("user", "handedness"))
FORCE_MODEL = ModelSpec.pairwise(("user", "handedness", "sensor"))
UNITS = ("sample", "session")


def time_anova(sessions: Sequence[Session]) -> AnovaTable:
    """Task time (s) as a function of user and handedness, one value per session."""
    if not sessions:
        raise EmptyInput("no sessions")
    return fit_anova_columns(
        [s.task_time_s for s in sessions],
        {"user": [s.user.user_id for s in sessions],
         "handedness": [s.hand.value for s in sessions]},
        TIME_MODEL,
    )


def force_columns(sessions: Sequence[Session], unit: str):
    """Response and factor columns for the user x handedness x sensor model.

    ``sample`` uses every raw reading; ``session`` averages each sensor
    within each session first.
    """
    if unit not in UNITS:
        raise InvalidData(f"unit must be one of {UNITS}, got {unit!r}")
    values, users, hands, sensors = [], [], [], []
    for s in sessions:
        if not s.readings:
            continue
        volts = np.fromiter((r.voltage_mv for r in s.readings), dtype=float, count=len(s.readings))
        ids = np.fromiter((r.sensor_id for r in s.readings), dtype=np.int64, count=len(s.readings))
        if unit == "sample":
            values.append(volts)
            labels = ids
        else:
            labels = np.unique(ids)
            values.append(np.array([volts[ids == k].mean() for k in labels]))
        users.extend([s.user.user_id] * labels.size)
        hands.extend([s.hand.value] * labels.size)
        sensors.extend(f"S{k}" for k in labels.tolist())
    if not values:
        raise EmptyInput("no readings in any session")
    return np.concatenate(values), {"user": users, "handedness": hands, "sensor": sensors}


def force_anova(sessions: Sequence[Session], unit: str) -> AnovaTable:
    values, columns = force_columns(sessions, unit)
    return fit_anova_columns(values, columns, FORCE_MODEL)


def time_summary(sessions: Sequence[Session]) -> dict[tuple[str, str], SummaryStats]:
    """Mean/SEM of task time per (user, hand role)."""
    groups: dict[tuple[str, str], list[float]] = defaultdict(list)
    for s in sessions:
        groups[(s.user.user_id, s.hand.value)].append(s.task_time_s)
    return {k: summary_stats(v) for k, v in sorted(groups.items())}


def force_level_summary(sessions: Sequence[Session]) -> dict[str, dict[str, SummaryStats]]:
    """Per-sample mean/SEM of voltage for each level of each factor."""
    values, columns = force_columns(sessions, "sample")
    out = {}
    for factor, labels in columns.items():
        labels = np.asarray(labels)
        levels = sorted(set(labels.tolist()), key=_level_key)
        out[factor] = {lv: summary_stats(values[labels == lv].tolist()) for lv in levels}
    return out


def _level_key(label: str):
    # S2 before S10
    if label.startswith("S") and label[1:].isdigit():
        return (0, int(label[1:]), label)
    return (1, 0, label)
