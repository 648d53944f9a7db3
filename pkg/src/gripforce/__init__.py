"""Grip-force glove analytics: wire framing, calibration, sessions,
factorial ANOVA, windowed profiles and a deterministic simulator."""

from .calibration import CalibrationCurve, DividerParams, divider_voltage, estimate_force, inverse_divider
from .datamodel import (
    Expertise,
    HandRole,
    Session,
    StepAnnotations,
    UserMeta,
    attach_steps,
    count_signals,
    load_session_csv,
    save_session_csv,
    total_force_table,
)
from .wire import Hand, SensorReading, decode_frame, decode_stream, encode_frame

__version__ = "0.1.0"
