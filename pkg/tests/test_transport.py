import pytest

from mpcmp import Params, run
from mpcmp.errors import InvalidArgument, TransportError
from mpcmp.transport import LAN, WAN, CostReport, NetProfile, SimFabric, model_time, read_endpoints, run_parties


def test_empty_payload_still_counts_a_round():
    res = run_parties(3, lambda i, ep: ep.exchange(b""))
    assert res.report.rounds == 1 and res.report.bytes_sent_per_party == 0


def test_bytes_counted_per_peer():
    res = run_parties(3, lambda i, ep: ep.exchange(b"\x00" * 8))
    assert res.report.rounds == 1
    assert res.report.bytes_sent_per_party == 16
    assert all(len(t) == 4 for t in res.transcripts)


def test_per_peer_payloads_delivered():
    def role(i, ep):
        return ep.exchange({j: bytes([i, j]) for j in ep.peers})

    res = run_parties(3, role)
    assert res.outputs[0] == {1: bytes([1, 0]), 2: bytes([2, 0])}


def test_round_tag_mismatch():
    fab = SimFabric(2, timeout=5)
    fab._boxes[(1, 0)].put((7, b""))
    with pytest.raises(TransportError):
        fab.endpoint(0).exchange(b"")


def test_party_failure_tears_down_peers():
    def role(i, ep):
        if i == 1:
            raise RuntimeError("boom")
        ep.exchange(b"x")

    with pytest.raises(RuntimeError):
        run_parties(3, role)


def test_model_time_examples():
    rep = CostReport(7, 10_000)
    assert model_time(rep, WAN) == pytest.approx(700.8)
    assert model_time(rep, LAN) == pytest.approx(7.008)
    assert rep.under(WAN).modeled_ms == pytest.approx(700.8)
    assert NetProfile.parse("custom:50:1e6").rtt_ms == 50
    with pytest.raises(InvalidArgument):
        NetProfile.parse("satellite")
    with pytest.raises(InvalidArgument):
        NetProfile("x", 0, 1)


def test_two_party_sim_run():
    out = run(Params("and_m", n_parties=2, ell=2), [[1, 1], [0, 1]], seed=1)
    assert out.outputs == [1, 0]


@pytest.mark.parametrize("protocol,extra,inputs", [
    ("msb_2k", {"k": 16, "n_branch": 4}, [3, 40000, 0]),
    ("ltbits_p", {"p": 61, "ell": 5}, [(3, 5), (31, 2)]),
    ("prefix_and", {"ell": 6, "n_branch": 3}, [[1, 1, 1, 0, 1, 1]]),
])
@pytest.mark.parametrize("active", [False, True])
def test_sim_and_tcp_agree(protocol, extra, inputs, active):
    params = Params(protocol, n_parties=3, active=active, **extra)
    sim = run(params, inputs, seed=5)
    tcp = run(params, inputs, seed=5, fabric="tcp")
    assert sim.outputs == tcp.outputs
    assert (sim.report.rounds, sim.report.bytes_sent_per_party) == (tcp.report.rounds, tcp.report.bytes_sent_per_party)
    assert tcp.report.wall_ms is not None


def test_read_endpoints(tmp_path):
    f = tmp_path / "eps.txt"
    f.write_text("# parties\n127.0.0.1:7000\n\nlocalhost:7001  # second\n:7002\n")
    assert read_endpoints(str(f)) == [("127.0.0.1", 7000), ("localhost", 7001), ("127.0.0.1", 7002)]
