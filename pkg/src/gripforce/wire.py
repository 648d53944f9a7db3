"""Binary framing for single glove samples.

Frame layout (9 bytes, multi-byte fields little-endian)::

    +------+---------+--------------+------------+-----+
    | 0xA5 | id/hand | timestamp_ms | voltage_mv | xor |
    | 1B   | 1B      | u32          | u16        | 1B  |
    +------+---------+--------------+------------+-----+

``id/hand``: bits 7..5 zero, bit 4 the hand (0 = left, 1 = right),
bits 3..0 the sensor id 1..12. The last byte is the XOR of bytes 0..7.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from functools import reduce
from operator import xor

from .errors import (
    BadChecksum,
    BadLength,
    BadSync,
    FieldOutOfRange,
    InvalidReading,
)

SYNC = 0xA5
FRAME_SIZE = 9
N_SENSORS = 12
MAX_VOLTAGE_MV = 3300
MAX_TIMESTAMP_MS = 0xFFFFFFFF

_BODY = struct.Struct("<BBIH")
_HAND_BIT = 0x10
_ID_MASK = 0x0F
_RESERVED_MASK = 0xE0


class Hand(enum.Enum):
    LEFT = "L"
    RIGHT = "R"


@dataclass(frozen=True, slots=True)
class SensorReading:
    """One timestamped voltage sample from one sensor on one physical hand."""

    sensor_id: int
    hand: Hand
    timestamp_ms: int
    voltage_mv: int

    def __post_init__(self):
        if not 1 <= self.sensor_id <= N_SENSORS:
            raise InvalidReading(f"sensor_id {self.sensor_id} outside 1..{N_SENSORS}")
        if not isinstance(self.hand, Hand):
            raise InvalidReading(f"hand must be a Hand, got {self.hand!r}")
        if not 0 <= self.timestamp_ms <= MAX_TIMESTAMP_MS:
            raise InvalidReading(f"timestamp_ms {self.timestamp_ms} not a u32")
        if not 0 <= self.voltage_mv <= MAX_VOLTAGE_MV:
            raise InvalidReading(f"voltage_mv {self.voltage_mv} outside 0..{MAX_VOLTAGE_MV}")


def checksum(body: bytes) -> int:
    return reduce(xor, body, 0)


def encode_frame(reading: SensorReading) -> bytes:
    if not isinstance(reading, SensorReading):
        raise InvalidReading(f"expected SensorReading, got {type(reading).__name__}")
    id_hand = reading.sensor_id | (_HAND_BIT if reading.hand is Hand.RIGHT else 0)
    body = _BODY.pack(SYNC, id_hand, reading.timestamp_ms, reading.voltage_mv)
    return body + bytes((checksum(body),))


def decode_frame(frame: bytes) -> SensorReading:
    """Decode exactly one 9-byte frame.

    Raises:
        BadLength: ``frame`` is not 9 bytes long.
        BadSync: byte 0 is not 0xA5.
        BadChecksum: byte 8 does not match the XOR of bytes 0..7.
        FieldOutOfRange: reserved bits set, sensor id not in 1..12, or
            voltage above the 3300 mV rail.
    """
    if len(frame) != FRAME_SIZE:
        raise BadLength(f"frame must be {FRAME_SIZE} bytes, got {len(frame)}")
    if frame[0] != SYNC:
        raise BadSync(f"sync byte 0x{frame[0]:02X} != 0x{SYNC:02X}")
    if checksum(frame[:8]) != frame[8]:
        raise BadChecksum(f"checksum 0x{frame[8]:02X} != 0x{checksum(frame[:8]):02X}")
    _, id_hand, timestamp_ms, voltage_mv = _BODY.unpack_from(frame)
    if id_hand & _RESERVED_MASK:
        raise FieldOutOfRange(f"reserved bits set in id/hand byte 0x{id_hand:02X}")
    sensor_id = id_hand & _ID_MASK
    if not 1 <= sensor_id <= N_SENSORS:
        raise FieldOutOfRange(f"sensor id {sensor_id} outside 1..{N_SENSORS}")
    if voltage_mv > MAX_VOLTAGE_MV:
        raise FieldOutOfRange(f"voltage {voltage_mv} mV above {MAX_VOLTAGE_MV} mV rail")
    hand = Hand.RIGHT if id_hand & _HAND_BIT else Hand.LEFT
    return SensorReading(sensor_id, hand, timestamp_ms, voltage_mv)


def encode_readings(readings) -> bytes:
    return b"".join(encode_frame(r) for r in readings)


@dataclass
class StreamDecodeReport:
    readings: list[SensorReading] = field(default_factory=list)
    # (offset, length) in absolute stream coordinates
    skipped_byte_spans: list[tuple[int, int]] = field(default_factory=list)
    pending_bytes: int = 0

    @property
    def skipped_total(self) -> int:
        return sum(length for _, length in self.skipped_byte_spans)

    def to_dict(self) -> dict:
        return {
            "readings": len(self.readings),
            "skipped_byte_spans": [list(span) for span in self.skipped_byte_spans],
            "skipped_bytes": self.skipped_total,
            "pending_bytes": self.pending_bytes,
        }


class StreamDecoder:
    """Incremental resynchronizing decoder.

    Bytes may arrive in arbitrary chunks via :meth:`feed`. A candidate
    frame starts at every 0xA5; if it fails validation the decoder drops a
    single byte and rescans. Holds mutable state, so one instance belongs
    to one stream.
    """

    def __init__(self):
        self._buf = bytearray()
        self._offset = 0  # absolute stream position of _buf[0]
        self.skipped_byte_spans: list[tuple[int, int]] = []
        self.frames_decoded = 0

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)

    def _skip(self, n: int) -> None:
        start = self._offset
        spans = self.skipped_byte_spans
        if spans and spans[-1][0] + spans[-1][1] == start:
            spans[-1] = (spans[-1][0], spans[-1][1] + n)
        else:
            spans.append((start, n))
        del self._buf[:n]
        self._offset += n

    def feed(self, data: bytes) -> list[SensorReading]:
        self._buf.extend(data)
        out = []
        buf = self._buf
        while buf:
            if buf[0] != SYNC:
                nxt = buf.find(SYNC)
                self._skip(len(buf) if nxt < 0 else nxt)
                continue
            if len(buf) < FRAME_SIZE:
                break
            try:
                reading = decode_frame(bytes(buf[:FRAME_SIZE]))
            except (BadSync, BadChecksum, FieldOutOfRange):
                self._skip(1)
                continue
            out.append(reading)
            del buf[:FRAME_SIZE]
            self._offset += FRAME_SIZE
            self.frames_decoded += 1
        return out


def decode_stream(data: bytes) -> StreamDecodeReport:
    """Decode a complete byte sequence, reporting corruption instead of raising."""
    decoder = StreamDecoder()
    readings = decoder.feed(data)
    return StreamDecodeReport(
        readings=readings,
        skipped_byte_spans=list(decoder.skipped_byte_spans),
        pending_bytes=decoder.pending_bytes,
    )
