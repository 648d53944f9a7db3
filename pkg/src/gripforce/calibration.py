"""FSR voltage-divider model and voltage to force conversion.

The FSR sits on the high side of a divider with a pull-down resistor to
ground, so the analog input sees ``r_pd * v_supply / (r_pd + r_fsr)``.
Statistics elsewhere run on raw millivolts; force in Newtons is only a
presentation transform.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidData, NegativeResistance, OutOfRangeVoltage


@dataclass(frozen=True)
class DividerParams:
    r_pd: float = 10_000.0  # ohms
    v_supply: float = 3.3  # volts

    def __post_init__(self):
        if not self.r_pd > 0:
            raise InvalidData(f"r_pd must be > 0, got {self.r_pd}")
        if not self.v_supply > 0:
            raise InvalidData(f"v_supply must be > 0, got {self.v_supply}")

    @property
    def supply_mv(self) -> float:
        return self.v_supply * 1000.0


@dataclass(frozen=True)
class CalibrationCurve:
    """Linear force map anchored at the origin and (v_max_mv, f_max_n)."""

    v_max_mv: float = 1500.0
    f_max_n: float = 10.0

    def __post_init__(self):
        if not self.v_max_mv > 0:
            raise InvalidData(f"v_max_mv must be > 0, got {self.v_max_mv}")
        if not self.f_max_n > 0:
            raise InvalidData(f"f_max_n must be > 0, got {self.f_max_n}")


def divider_voltage(r_fsr: float, params: DividerParams = DividerParams()) -> float:
    """Divider output in millivolts for an FSR resistance in ohms."""
    if r_fsr < 0:
        raise NegativeResistance(f"r_fsr must be >= 0, got {r_fsr}")
    return params.r_pd * params.supply_mv / (params.r_pd + r_fsr)


def inverse_divider(v_out: float, params: DividerParams = DividerParams()) -> float:
    """FSR resistance in ohms that produces ``v_out`` millivolts.

    0 mV would need infinite resistance and is rejected along with
    anything above the supply.
    """
    if not 0 < v_out <= params.supply_mv:
        raise OutOfRangeVoltage(f"v_out must be in (0, {params.supply_mv}] mV, got {v_out}")
    return params.r_pd * (params.supply_mv - v_out) / v_out


def estimate_force(voltage_mv: float, curve: CalibrationCurve = CalibrationCurve()) -> float:
    if voltage_mv < 0:
        raise OutOfRangeVoltage(f"voltage_mv must be >= 0, got {voltage_mv}")
    if voltage_mv >= curve.v_max_mv:
        return curve.f_max_n
    return curve.f_max_n * (voltage_mv / curve.v_max_mv)
