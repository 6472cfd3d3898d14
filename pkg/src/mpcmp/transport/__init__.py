from .cost import LAN, PROFILES, WAN, CostReport, NetProfile, model_time
from .fabric import Endpoint, SimFabric, TcpEndpoint, TcpFabric, read_endpoints
from .runner import PartyResult, RunResult, run_parties

__all__ = [
    "LAN",
    "PROFILES",
    "WAN",
    "CostReport",
    "Endpoint",
    "NetProfile",
    "PartyResult",
    "RunResult",
    "SimFabric",
    "TcpEndpoint",
    "TcpFabric",
    "model_time",
    "read_endpoints",
    "run_parties",
]
