"""Timestamp helpers: UTC milliseconds since epoch <-> ISO 8601 text."""

from __future__ import annotations

from datetime import datetime, timezone

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def parse_timestamp_ms(text: str) -> int:
    """Parse an ISO 8601 timestamp to UTC milliseconds.

    Accepts a trailing 'Z' or an explicit offset; a naive timestamp is
    taken as UTC.
    """
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return round(dt.timestamp() * 1000)


def format_timestamp_ms(ms: int) -> str:
    """Render UTC milliseconds as ISO 8601 with a 'Z' suffix.

    Sub-second part is emitted only when non-zero, so whole-second
    streams stay byte-stable.
    """
    seconds, millis = divmod(int(ms), 1000)
    dt = datetime.fromtimestamp(seconds, tz=timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if millis:
        return f"{base}.{millis:03d}Z"
    return base + "Z"


def now_ms() -> int:
    return round(datetime.now(tz=timezone.utc).timestamp() * 1000)
