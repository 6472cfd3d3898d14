from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Any, Callable

from ..errors import Abort, MPCError, TransportError
from .cost import CostReport
from .fabric import Endpoint, SimFabric, TcpFabric


@dataclass
class PartyResult:
    output: Any
    rounds: int
    bytes_sent: int
    transcript: list[tuple[int, int, int, bytes]]


@dataclass
class RunResult:
    outputs: list[Any]
    parties: list[PartyResult]
    report: CostReport

    @property
    def transcripts(self) -> list[list[tuple[int, int, int, bytes]]]:
        return [p.transcript for p in self.parties]


def make_fabric(kind: str, n_parties: int, addresses=None, timeout: float = 120.0):
    if kind == "sim":
        return SimFabric(n_parties, timeout)
    if kind == "tcp":
        return TcpFabric(n_parties, addresses, timeout)
    raise ValueError(f"unknown fabric {kind!r}")


def run_parties(
    n_parties: int,
    role: Callable[[int, Endpoint], Any],
    fabric: str = "sim",
    addresses=None,
    timeout: float = 120.0,
) -> RunResult:
    """Run ``role(party, endpoint)`` for every party, each in its own thread.

    Any party failing tears the fabric down so the others stop waiting; a MAC
    failure anywhere surfaces as :class:`Abort` for the whole run.
    """
    fab = make_fabric(fabric, n_parties, addresses, timeout)
    results: list[PartyResult | None] = [None] * n_parties
    errors: list[BaseException | None] = [None] * n_parties

    def body(i: int) -> None:
        try:
            ep = fab.endpoint(i)
            out = role(i, ep)
            results[i] = PartyResult(out, ep.round, ep.bytes_sent, ep.transcript)
        except BaseException as exc:  # propagated below
            errors[i] = exc
            fab.abort()

    start = time.perf_counter()
    threads = [threading.Thread(target=body, args=(i,), name=f"party-{i}") for i in range(n_parties)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    wall_ms = (time.perf_counter() - start) * 1000
    if fabric == "tcp":
        fab.abort()

    failures = [e for e in errors if e is not None]
    if failures:
        aborts = [e for e in failures if isinstance(e, Abort)]
        if aborts:
            raise aborts[0]
        primary = [e for e in failures if not isinstance(e, TransportError)]
        raise (primary or failures)[0]

    rounds = {r.rounds for r in results}
    if len(rounds) != 1:
        raise MPCError(f"parties disagree on round count: {sorted(rounds)}")
    report = CostReport(
        rounds=rounds.pop(),
        bytes_sent_per_party=max(r.bytes_sent for r in results),
        wall_ms=wall_ms if fabric == "tcp" else None,
    )
    return RunResult([r.output for r in results], list(results), report)
