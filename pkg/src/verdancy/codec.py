"""RuuviTag manufacturer-data codec for broadcast data formats 5 and 3.

Decodes the raw payload (after the BLE manufacturer-ID header) into
physical measurements and encodes measurements back into payload bytes
for test-vector generation.  All multi-byte fields are big-endian.

Format 5 (24 bytes) uses designated invalid sentinels per field: a field
whose raw encoding equals its sentinel decodes as absent (None), never
zero-filled.  Format 3 (14 bytes) is the legacy layout without sentinels.

Temperature and humidity are exact multiples of the LSB step, so they are
carried as Decimal (a scaled-integer representation) to avoid
binary-fraction drift.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP

DATA_FORMAT_5 = 5
DATA_FORMAT_3 = 3
PAYLOAD_LEN = {DATA_FORMAT_3: 14, DATA_FORMAT_5: 24}

# -- Field scaling ------------------------------------------------------------

TEMPERATURE_STEP = Decimal("0.005")  # degC per LSB (format 5)
HUMIDITY_STEP = Decimal("0.0025")  # %RH per LSB (format 5)
F3_TEMPERATURE_STEP = Decimal("0.01")  # degC per fraction LSB (format 3)
F3_HUMIDITY_STEP = Decimal("0.5")  # %RH per LSB (format 3)
PRESSURE_OFFSET_PA = 50000
BATTERY_OFFSET_MV = 1600
TX_POWER_BASE_DBM = -40  # 2 dBm per step

# -- Invalid sentinels (format 5) ----------------------------------------------

INVALID_S16 = -0x8000  # temperature, acceleration axes
INVALID_U16 = 0xFFFF  # humidity, pressure, sequence
INVALID_BATTERY = 0x7FF  # 11-bit battery field
INVALID_TX_POWER = 0x1F  # 5-bit tx power field
INVALID_MOVEMENT = 0xFF
INVALID_MAC = b"\xff" * 6


class CodecError(ValueError):
    """Base class for payload decode/encode failures."""


class UnknownFormat(CodecError):
    """Unsupported data-format identifier byte."""

    def __init__(self, fmt: int):
        super().__init__(f"unsupported data format {fmt}")
        self.format = fmt


class TruncatedPayload(CodecError):
    """Payload length does not match the detected format."""


class OutOfRange(CodecError):
    """Measurement value not representable in the target format."""

    def __init__(self, field: str, message: str = ""):
        super().__init__(message or f"{field} not representable")
        self.field = field


@dataclass(frozen=True)
class DecodedMeasurement:
    """One decoded advertisement.  Absent fields are None."""

    format: int = DATA_FORMAT_5
    temperature_c: Decimal | None = None
    humidity_pct: Decimal | None = None
    pressure_pa: int | None = None
    accel_mg: tuple[int, int, int] | None = None
    battery_mv: int | None = None
    tx_power_dbm: int | None = None
    movement_count: int | None = None
    sequence: int | None = None
    mac: bytes | None = None


def detect_format(payload: bytes) -> int:
    """Return the data-format id (first byte) after validating length.

    Raises:
        TruncatedPayload: empty payload or length mismatch for the format.
        UnknownFormat: first byte is not a supported format id.
    """
    if not payload:
        raise TruncatedPayload("empty payload")
    fmt = payload[0]
    if fmt not in PAYLOAD_LEN:
        raise UnknownFormat(fmt)
    if len(payload) != PAYLOAD_LEN[fmt]:
        raise TruncatedPayload(
            f"format {fmt} payload must be {PAYLOAD_LEN[fmt]} bytes, got {len(payload)}"
        )
    return fmt


def decode(payload: bytes) -> DecodedMeasurement:
    """Decode a payload into a DecodedMeasurement.

    Total over arbitrary byte input: returns a value or raises a
    CodecError subclass, never anything else.
    """
    fmt = detect_format(payload)
    if fmt == DATA_FORMAT_5:
        return _decode_f5(payload)
    return _decode_f3(payload)


def encode(m: DecodedMeasurement) -> bytes:
    """Encode a measurement into payload bytes (absent fields as sentinels).

    Values are quantized to the format's LSB grid; decode(encode(m))
    reproduces m exactly for on-grid values.

    Raises:
        OutOfRange: a present field is not representable in m.format.
        UnknownFormat: m.format is not 3 or 5.
    """
    if m.format == DATA_FORMAT_5:
        return _encode_f5(m)
    if m.format == DATA_FORMAT_3:
        return _encode_f3(m)
    raise UnknownFormat(m.format)


def payload_from_hex(text: str) -> bytes:
    """Parse the CLI hex form: even-length, case-insensitive, no separators."""
    if len(text) % 2 != 0:
        raise ValueError("hex payload must have even length")
    if not all(c in "0123456789abcdefABCDEF" for c in text):
        raise ValueError("hex payload must contain only hex digits, no separators")
    return bytes.fromhex(text)


# -- Format 5 -------------------------------------------------------------------

_F5_BODY = struct.Struct(">hHHhhhHBH")


def _decode_f5(payload: bytes) -> DecodedMeasurement:
    temp, hum, pres, ax, ay, az, power, movement, seq = _F5_BODY.unpack(payload[1:18])
    mac = payload[18:24]
    batt_raw = power >> 5
    tx_raw = power & 0x1F
    return DecodedMeasurement(
        format=DATA_FORMAT_5,
        temperature_c=None if temp == INVALID_S16 else Decimal(temp) * TEMPERATURE_STEP,
        humidity_pct=None if hum == INVALID_U16 else Decimal(hum) * HUMIDITY_STEP,
        pressure_pa=None if pres == INVALID_U16 else pres + PRESSURE_OFFSET_PA,
        accel_mg=None if INVALID_S16 in (ax, ay, az) else (ax, ay, az),
        battery_mv=None if batt_raw == INVALID_BATTERY else BATTERY_OFFSET_MV + batt_raw,
        tx_power_dbm=None if tx_raw == INVALID_TX_POWER else TX_POWER_BASE_DBM + 2 * tx_raw,
        movement_count=None if movement == INVALID_MOVEMENT else movement,
        sequence=None if seq == INVALID_U16 else seq,
        mac=None if mac == INVALID_MAC else mac,
    )


def _quantize(value, step: Decimal) -> int:
    """Raw LSB count for a value, rounded half-up onto the step grid."""
    return int((Decimal(value) / step).to_integral_value(rounding=ROUND_HALF_UP))


def _encode_f5(m: DecodedMeasurement) -> bytes:
    if m.temperature_c is None:
        temp = INVALID_S16
    else:
        temp = _quantize(m.temperature_c, TEMPERATURE_STEP)
        if not -32767 <= temp <= 32767:
            raise OutOfRange("temperature_c")

    if m.humidity_pct is None:
        hum = INVALID_U16
    else:
        hum = _quantize(m.humidity_pct, HUMIDITY_STEP)
        if not 0 <= hum <= 65534:
            raise OutOfRange("humidity_pct")

    if m.pressure_pa is None:
        pres = INVALID_U16
    else:
        pres = m.pressure_pa - PRESSURE_OFFSET_PA
        if not 0 <= pres <= 65534:
            raise OutOfRange("pressure_pa")

    if m.accel_mg is None:
        ax = ay = az = INVALID_S16
    else:
        ax, ay, az = m.accel_mg
        for axis in (ax, ay, az):
            if not -32767 <= axis <= 32767:
                raise OutOfRange("accel_mg")

    if m.battery_mv is None:
        batt_raw = INVALID_BATTERY
    else:
        batt_raw = m.battery_mv - BATTERY_OFFSET_MV
        if not 0 <= batt_raw <= 2046:
            raise OutOfRange("battery_mv")

    if m.tx_power_dbm is None:
        tx_raw = INVALID_TX_POWER
    else:
        delta = m.tx_power_dbm - TX_POWER_BASE_DBM
        if delta % 2 != 0 or not 0 <= delta // 2 <= 30:
            raise OutOfRange("tx_power_dbm")
        tx_raw = delta // 2

    if m.movement_count is None:
        movement = INVALID_MOVEMENT
    else:
        movement = m.movement_count
        if not 0 <= movement <= 254:
            raise OutOfRange("movement_count")

    if m.sequence is None:
        seq = INVALID_U16
    else:
        seq = m.sequence
        if not 0 <= seq <= 65534:
            raise OutOfRange("sequence")

    if m.mac is None:
        mac = INVALID_MAC
    else:
        mac = bytes(m.mac)
        if len(mac) != 6 or mac == INVALID_MAC:
            raise OutOfRange("mac")

    body = _F5_BODY.pack(temp, hum, pres, ax, ay, az, (batt_raw << 5) | tx_raw, movement, seq)
    return bytes([DATA_FORMAT_5]) + body + mac


# -- Format 3 (legacy, no sentinels) ----------------------------------------------


def _decode_f3(payload: bytes) -> DecodedMeasurement:
    humidity = Decimal(payload[1]) * F3_HUMIDITY_STEP
    # byte 2: sign bit + integer degrees, byte 3: centi-degree fraction
    sign = -1 if payload[2] & 0x80 else 1
    centi = (payload[2] & 0x7F) * 100 + payload[3]
    pres, ax, ay, az, batt = struct.unpack(">Hhhh H".replace(" ", ""), payload[4:14])
    return DecodedMeasurement(
        format=DATA_FORMAT_3,
        temperature_c=Decimal(sign * centi) * F3_TEMPERATURE_STEP,
        humidity_pct=humidity,
        pressure_pa=pres + PRESSURE_OFFSET_PA,
        accel_mg=(ax, ay, az),
        battery_mv=batt,
    )


def _encode_f3(m: DecodedMeasurement) -> bytes:
    for field in ("temperature_c", "humidity_pct", "pressure_pa", "accel_mg", "battery_mv"):
        if getattr(m, field) is None:
            raise OutOfRange(field, f"format 3 cannot express absent {field}")
    for field in ("tx_power_dbm", "movement_count", "sequence", "mac"):
        if getattr(m, field) is not None:
            raise OutOfRange(field, f"format 3 has no {field} field")

    centi = _quantize(m.temperature_c, F3_TEMPERATURE_STEP)
    if not -12799 <= centi <= 12799:
        raise OutOfRange("temperature_c")
    sign_bit = 0x80 if centi < 0 else 0
    centi = abs(centi)

    hum = _quantize(m.humidity_pct, F3_HUMIDITY_STEP)
    if not 0 <= hum <= 255:
        raise OutOfRange("humidity_pct")

    pres = m.pressure_pa - PRESSURE_OFFSET_PA
    if not 0 <= pres <= 65535:
        raise OutOfRange("pressure_pa")

    ax, ay, az = m.accel_mg
    for axis in (ax, ay, az):
        if not -32768 <= axis <= 32767:
            raise OutOfRange("accel_mg")

    if not 0 <= m.battery_mv <= 65535:
        raise OutOfRange("battery_mv")

    return bytes([DATA_FORMAT_3, hum, sign_bit | (centi // 100), centi % 100]) + struct.pack(
        ">HhhhH", pres, ax, ay, az, m.battery_mv
    )
