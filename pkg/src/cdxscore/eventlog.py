"""Append-only newline-delimited JSON event log.

One record per line: sequence number (contiguous from 1), a payload kind
tag, the payload itself and a wall-clock write timestamp in epoch
milliseconds. Records are immutable once written; recovery replays the file
in order and stops at the first corrupted line, reporting how far it got.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

KINDS = ("scoring_event", "reflection", "telemetry_batch", "survey_answer")


@dataclass(frozen=True)
class EventLogRecord:
    seq: int
    kind: str
    payload: dict
    written_at: int  # epoch ms

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "kind": self.kind, "written_at": self.written_at,
             "payload": self.payload},
            sort_keys=True,
        )


@dataclass
class RecoveryReport:
    records_read: int
    last_valid_seq: int
    corrupted: bool = False
    error: Optional[str] = None


class CorruptLogError(Exception):
    pass


def _now_ms() -> int:
    return int(time.time() * 1000)


class EventLog:
    """Single-writer appender; all writes serialize through one lock."""

    def __init__(
        self,
        path: Union[str, Path],
        fsync: bool = True,
        clock: Callable[[], int] = _now_ms,
    ):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fsync = fsync
        self._clock = clock
        self._lock = threading.Lock()
        self._seq = 0
        if self.path.exists():
            report, records = read_records(self.path)
            if report.corrupted:
                raise CorruptLogError(
                    f"{self.path}: corrupt at record {report.last_valid_seq + 1}: {report.error}"
                )
            self._seq = report.last_valid_seq
        self._fh = self.path.open("a", encoding="utf-8")

    @property
    def next_seq(self) -> int:
        return self._seq + 1

    def append(self, kind: str, payload: dict) -> EventLogRecord:
        if kind not in KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        with self._lock:
            record = EventLogRecord(
                seq=self._seq + 1, kind=kind, payload=payload, written_at=self._clock()
            )
            self._fh.write(record.to_line() + "\n")
            self._fh.flush()
            if self._fsync:
                os.fsync(self._fh.fileno())
            self._seq = record.seq
        return record

    def close(self) -> None:
        self._fh.close()


def read_records(
    path: Union[str, Path], limit: Optional[int] = None
) -> tuple[RecoveryReport, list[EventLogRecord]]:
    """Read records in order, stopping at the first corrupted line.

    Corruption (bad JSON, missing fields, a sequence gap) never raises; the
    report says how many records were recovered and why reading stopped.
    Reading is pure, so recovery is idempotent.
    """
    records: list[EventLogRecord] = []
    report = RecoveryReport(records_read=0, last_valid_seq=0)
    path = Path(path)
    if not path.exists():
        return report, records
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if limit is not None and len(records) >= limit:
                break
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                record = EventLogRecord(
                    seq=int(d["seq"]),
                    kind=d["kind"],
                    payload=d["payload"],
                    written_at=int(d["written_at"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                report.corrupted = True
                report.error = f"line {line_no}: {e}"
                break
            if record.seq != report.last_valid_seq + 1:
                report.corrupted = True
                report.error = (
                    f"line {line_no}: sequence gap (expected {report.last_valid_seq + 1}, "
                    f"got {record.seq})"
                )
                break
            if record.kind not in KINDS:
                report.corrupted = True
                report.error = f"line {line_no}: unknown kind {record.kind!r}"
                break
            records.append(record)
            report.records_read += 1
            report.last_valid_seq = record.seq
    return report, records
