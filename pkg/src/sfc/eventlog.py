"""Append-only engine journal: length-prefixed single-line JSON records.

Each record is a u32 big-endian byte count followed by that many bytes of
UTF-8 JSON ending in a newline, so the file is both seekable by prefix
and greppable as text. Replay stops at the first incomplete record, which
tolerates a torn final write after a crash.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterator

_PREFIX = struct.Struct(">I")


class EventLog:
    def __init__(self, path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "ab")

    def append(self, kind: str, payload: dict) -> None:
        line = json.dumps({"kind": kind, "data": payload},
                          separators=(",", ":"), sort_keys=True) + "\n"
        encoded = line.encode("utf-8")
        self._handle.write(_PREFIX.pack(len(encoded)) + encoded)
        self._handle.flush()

    def close(self) -> None:
        self._handle.close()


def iter_records(path) -> Iterator[tuple[str, dict]]:
    """Yield (kind, payload) for every complete record in the file."""
    path = Path(path)
    if not path.exists():
        return
    with open(path, "rb") as handle:
        while True:
            prefix = handle.read(_PREFIX.size)
            if len(prefix) < _PREFIX.size:
                return
            (length,) = _PREFIX.unpack(prefix)
            body = handle.read(length)
            if len(body) < length:
                return  # torn tail record
            record = json.loads(body.decode("utf-8"))
            yield record["kind"], record["data"]
