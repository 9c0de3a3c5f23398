"""Availability monitoring of each team's critical services.

Probing is the only nondeterministic step and is isolated in ``probe``;
turning probe results into Services-category penalty events
(``evaluate_checks``) is pure. DNS failures, timeouts and refused
connections are all just "down" — never errors.
"""

from __future__ import annotations

import http.client
import socket
import threading
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .exercise import (
    ScoreCategory,
    ScoringEvent,
    ServiceDef,
    SourceRole,
    UnknownServiceError,
)

DEFAULT_PROBE_TIMEOUT = 2.0  # seconds


@dataclass(frozen=True)
class ProbeResult:
    service_id: str
    team_id: str
    probed_at: int  # epoch seconds
    up: bool
    latency_ms: Optional[float] = None  # present iff up

    def __post_init__(self):
        if self.up != (self.latency_ms is not None):
            raise ValueError("latency_ms must be present iff up")

    def to_dict(self) -> dict:
        d = {
            "service_id": self.service_id,
            "team_id": self.team_id,
            "probed_at": self.probed_at,
            "up": self.up,
        }
        if self.latency_ms is not None:
            d["latency_ms"] = self.latency_ms
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProbeResult":
        return cls(
            service_id=d["service_id"],
            team_id=d["team_id"],
            probed_at=int(d["probed_at"]),
            up=bool(d["up"]),
            latency_ms=d.get("latency_ms"),
        )


def probe(
    service: ServiceDef,
    clock: Optional[int] = None,
    timeout: float = DEFAULT_PROBE_TIMEOUT,
) -> ProbeResult:
    """Probe one service endpoint once.

    tcp-connect: up iff a TCP connection is accepted within the timeout.
    http-get: up iff a GET yields any HTTP response (status is not judged;
    a web server answering 500 is reachable, which is what we monitor).
    """
    probed_at = int(time.time()) if clock is None else clock
    started = time.perf_counter()
    up = False
    try:
        if service.protocol == "http-get":
            conn = http.client.HTTPConnection(service.host, service.port, timeout=timeout)
            try:
                conn.request("GET", service.http_path)
                conn.getresponse()
                up = True
            finally:
                conn.close()
        else:
            with socket.create_connection((service.host, service.port), timeout=timeout):
                up = True
    except OSError:
        up = False
    except Exception:
        # http.client can raise non-OSError garbage on broken servers
        up = False
    latency = (time.perf_counter() - started) * 1000.0 if up else None
    return ProbeResult(
        service_id=service.service_id,
        team_id=service.team_id,
        probed_at=probed_at,
        up=up,
        latency_ms=latency,
    )


def evaluate_checks(
    results: Iterable[ProbeResult],
    services: Iterable[ServiceDef],
) -> list[ScoringEvent]:
    """Convert failed checks into automatic Services penalties.

    One event per failed check, points = the service's penalty; successful
    checks produce nothing. Deterministic given the results.
    """
    by_id = {s.service_id: s for s in services}
    events: list[ScoringEvent] = []
    counters: dict[str, int] = {}
    for r in results:
        svc = by_id.get(r.service_id)
        if svc is None:
            raise UnknownServiceError(r.service_id)
        if r.up:
            continue
        n = counters.get(r.service_id, 0) + 1
        counters[r.service_id] = n
        events.append(
            ScoringEvent(
                event_id=f"svc-{r.service_id}-{n:04d}",
                exercise_id="",  # stamped by the caller; see attach_exercise
                team_id=svc.team_id,
                category=ScoreCategory.SERVICES,
                source=SourceRole.AUTO,
                points=svc.penalty_per_failed_check,
                occurred_at=r.probed_at,
                recorded_at=r.probed_at,
                title=f"{svc.name} unavailable",
                description=f"Availability check of {svc.name} failed.",
            )
        )
    return events


def attach_exercise(events: list[ScoringEvent], exercise_id: str) -> list[ScoringEvent]:
    from dataclasses import replace

    return [replace(ev, exercise_id=exercise_id) for ev in events]


def uptime_ratio(
    results: Iterable[ProbeResult],
    service_id: str,
    window: tuple[int, int],
) -> float:
    """Fraction of successful checks in [start, end).

    No checks in the window counts as fully up (vacuous uptime): a service
    nobody probed was never seen down.
    """
    start, end = window
    if end <= start:
        raise ValueError("window must be non-empty")
    total = ok = 0
    for r in results:
        if r.service_id == service_id and start <= r.probed_at < end:
            total += 1
            ok += r.up
    return ok / total if total else 1.0


def check_offsets(service: ServiceDef, duration: int) -> list[int]:
    """Scheduled check instants as offsets from exercise start.

    First check one interval in; last check at or before ``duration``.
    """
    return list(range(service.check_interval, duration + 1, service.check_interval))


def http_sink(base_url: str, token: str) -> Callable[[ScoringEvent], None]:
    """Sink that posts each penalty event to a running exercise service."""
    import json
    import urllib.request

    def send(event: ScoringEvent) -> None:
        request = urllib.request.Request(
            base_url.rstrip("/") + "/api/events",
            data=json.dumps(event.to_dict()).encode("utf-8"),
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {token}",
            },
            method="POST",
        )
        with urllib.request.urlopen(request, timeout=10) as response:
            response.read()

    return send


class Monitor:
    """Periodic prober feeding a sink with penalty events.

    At most one in-flight probe per service; probes for different services
    run concurrently. The sink receives each failed check's event right
    after the probe returns; sink failures are counted, never fatal.
    """

    def __init__(
        self,
        services: list[ServiceDef],
        sink: Callable[[ScoringEvent], None],
        exercise_id: str,
        timeout: float = DEFAULT_PROBE_TIMEOUT,
        interval_override: Optional[float] = None,
    ):
        self._services = list(services)
        self._sink = sink
        self._exercise_id = exercise_id
        self._timeout = timeout
        self._interval_override = interval_override
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._fail_counts: dict[str, int] = {}
        self.results: list[ProbeResult] = []
        self.sink_errors = 0
        self._lock = threading.Lock()

    def _run_service(self, svc: ServiceDef) -> None:
        interval = self._interval_override or svc.check_interval
        while not self._stop.wait(interval):
            result = probe(svc, timeout=self._timeout)
            with self._lock:
                self.results.append(result)
                if not result.up:
                    self._fail_counts[svc.service_id] = (
                        self._fail_counts.get(svc.service_id, 0) + 1
                    )
                    n = self._fail_counts[svc.service_id]
            if not result.up:
                event = ScoringEvent(
                    event_id=f"svc-{svc.service_id}-{n:04d}",
                    exercise_id=self._exercise_id,
                    team_id=svc.team_id,
                    category=ScoreCategory.SERVICES,
                    source=SourceRole.AUTO,
                    points=svc.penalty_per_failed_check,
                    occurred_at=result.probed_at,
                    recorded_at=result.probed_at,
                    title=f"{svc.name} unavailable",
                    description=f"Availability check of {svc.name} failed.",
                )
                try:
                    self._sink(event)
                except Exception:
                    with self._lock:
                        self.sink_errors += 1

    def start(self) -> None:
        for svc in self._services:
            t = threading.Thread(target=self._run_service, args=(svc,), daemon=True)
            self._threads.append(t)
            t.start()

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=5)
