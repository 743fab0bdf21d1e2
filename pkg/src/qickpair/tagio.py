"""Tag and capture file formats.

Tag CSV: header ``channel,time_ps``, one row per tag, channel ``A``/``B``,
time as a positional decimal with at least three fractional digits and
enough digits to round-trip the double exactly.

Tag binary: magic ``QTAG1\\n`` then packed little-endian records of
``uint8 channel`` (0 = A, 1 = B) and ``float64 time_ps``.

Capture binary: magic ``QCAP1\\n`` then per capture ``uint8 channel``,
``uint64 coarse_tag``, ``float64 sample_rate_hz``, ``uint16 pretrigger``,
``uint32 n`` followed by ``n`` little-endian ``int32`` ADC codes.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .readout import CapturedPulse
from .tagging import TimeTag

TAG_MAGIC = b"QTAG1\n"
CAPTURE_MAGIC = b"QCAP1\n"
CHANNELS = ("A", "B")
_TAG_DTYPE = np.dtype([("channel", "u1"), ("time_ps", "<f8")])
_CAPTURE_HEADER = struct.Struct("<BQdHI")


def format_time(t: float) -> str:
    return np.format_float_positional(float(t), unique=True, trim="k", min_digits=3)


def _is_binary(path: Path, binary) -> bool:
    if binary is not None:
        return binary
    return path.suffix.lower() != ".csv"


def write_tags(path, tags, binary=None) -> None:
    """Write tags as CSV (``.csv`` suffix) or the QTAG1 binary format (anything else)."""
    path = Path(path)
    tags = list(tags)
    if _is_binary(path, binary):
        rec = np.empty(len(tags), dtype=_TAG_DTYPE)
        rec["channel"] = [CHANNELS.index(t.channel) for t in tags]
        rec["time_ps"] = [t.time_ps for t in tags]
        path.write_bytes(TAG_MAGIC + rec.tobytes())
        return
    with path.open("w", newline="") as fh:
        fh.write("channel,time_ps\n")
        for t in tags:
            fh.write(f"{t.channel},{format_time(t.time_ps)}\n")


def read_tags(path, binary=None) -> list[TimeTag]:
    path = Path(path)
    if _is_binary(path, binary):
        data = path.read_bytes()
        if not data.startswith(TAG_MAGIC):
            raise ConfigError(f"{path}: missing QTAG1 header")
        body = data[len(TAG_MAGIC):]
        if len(body) % _TAG_DTYPE.itemsize:
            raise ConfigError(f"{path}: truncated tag record")
        rec = np.frombuffer(body, dtype=_TAG_DTYPE)
        if rec.size and rec["channel"].max() > 1:
            raise ConfigError(f"{path}: channel byte out of range")
        return [TimeTag(CHANNELS[c], float(t)) for c, t in zip(rec["channel"], rec["time_ps"])]
    out = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["channel", "time_ps"]:
            raise ConfigError(f"{path}:1: expected header 'channel,time_ps'")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2 or row[0] not in CHANNELS:
                raise ConfigError(f"{path}:{lineno}: malformed tag row {row!r}")
            try:
                out.append(TimeTag(row[0], float(row[1])))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad time value {row[1]!r}") from exc
    return out


def write_captures(path, captures) -> None:
    parts = [CAPTURE_MAGIC]
    for c in captures:
        codes = np.asarray(c.samples, dtype="<i4")
        parts.append(_CAPTURE_HEADER.pack(CHANNELS.index(c.channel), c.coarse_tag, c.sample_rate_hz,
                                          c.pretrigger, codes.size))
        parts.append(codes.tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_captures(path) -> list[CapturedPulse]:
    data = Path(path).read_bytes()
    if not data.startswith(CAPTURE_MAGIC):
        raise ConfigError(f"{path}: missing QCAP1 header")
    pos = len(CAPTURE_MAGIC)
    out = []
    while pos < len(data):
        if pos + _CAPTURE_HEADER.size > len(data):
            raise ConfigError(f"{path}: truncated capture header at byte {pos}")
        ch, tag, rate, pre, n = _CAPTURE_HEADER.unpack_from(data, pos)
        pos += _CAPTURE_HEADER.size
        end = pos + 4 * n
        if end > len(data) or ch > 1:
            raise ConfigError(f"{path}: corrupt capture record")
        codes = np.frombuffer(data[pos:end], dtype="<i4").astype(np.int32)
        out.append(CapturedPulse(CHANNELS[ch], tag, codes, rate, pre))
        pos = end
    return out
