from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import InvalidArgument


@dataclass(frozen=True)
class NetProfile:
    name: str
    rtt_ms: float
    bandwidth_bps: float

    def __post_init__(self):
        if self.rtt_ms <= 0 or self.bandwidth_bps <= 0:
            raise InvalidArgument("rtt and bandwidth must be positive")

    @classmethod
    def parse(cls, text: str) -> "NetProfile":
        """``lan``, ``wan`` or ``custom:<rtt ms>:<bits per second>``."""
        key = text.strip().lower()
        if key in PROFILES:
            return PROFILES[key]
        if key.startswith("custom:"):
            try:
                _, rtt, bw = key.split(":")
                return cls(key, float(rtt), float(bw))
            except ValueError:
                pass
        raise InvalidArgument(f"unknown network profile {text!r}")


LAN = NetProfile("lan", 1.0, 10e9)
WAN = NetProfile("wan", 100.0, 100e6)
PROFILES = {"lan": LAN, "wan": WAN}


@dataclass(frozen=True)
class CostReport:
    rounds: int
    bytes_sent_per_party: int
    modeled_ms: float = 0.0
    wall_ms: float | None = None
    profile: str = ""

    def under(self, profile: NetProfile) -> "CostReport":
        return replace(self, modeled_ms=model_time(self, profile), profile=profile.name)


def model_time(report: CostReport, profile: NetProfile) -> float:
    """Latency term plus serialization term, in milliseconds."""
    return report.rounds * profile.rtt_ms + report.bytes_sent_per_party * 8 / profile.bandwidth_bps * 1000
