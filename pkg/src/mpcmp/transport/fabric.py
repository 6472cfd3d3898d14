"""All-to-all round exchange with exact round and byte accounting.

Every protocol step of the form "parties open ..." is one call to
:meth:`Endpoint.exchange`. Two fabrics share the accounting: an in-process
queue fabric and a TCP fabric. Frames on the wire are a 4-byte little-endian
length, a 4-byte little-endian round tag, then the payload.
"""

from __future__ import annotations

import queue
import socket
import struct
import threading
import time
from typing import Mapping

from ..errors import TransportError

_HEADER = struct.Struct("<II")
_HELLO = struct.Struct("<I")
_CLOSED = object()


class Endpoint:
    """One party's view of the network."""

    def __init__(self, party: int, n_parties: int):
        self.party = party
        self.n_parties = n_parties
        self.round = 0
        self.bytes_sent = 0
        # (round, src, dst, payload) for every frame this party sent or received
        self.transcript: list[tuple[int, int, int, bytes]] = []

    @property
    def peers(self) -> list[int]:
        return [j for j in range(self.n_parties) if j != self.party]

    def exchange(self, outgoing: bytes | Mapping[int, bytes]) -> dict[int, bytes]:
        """Send to every peer, then wait for every peer's message of this round."""
        tag = self.round
        for peer in self.peers:
            payload = outgoing if isinstance(outgoing, (bytes, bytearray)) else outgoing.get(peer, b"")
            payload = bytes(payload)
            self._send(peer, tag, payload)
            self.bytes_sent += len(payload)
            self.transcript.append((tag, self.party, peer, payload))
        incoming = {}
        for peer in self.peers:
            rtag, payload = self._recv(peer)
            if rtag != tag:
                raise TransportError(f"party {self.party}: round {rtag} from {peer}, expected {tag}")
            incoming[peer] = payload
            self.transcript.append((tag, peer, self.party, payload))
        self.round += 1
        return incoming

    def snapshot(self) -> tuple[int, int]:
        return self.round, self.bytes_sent

    def _send(self, peer: int, tag: int, payload: bytes) -> None:
        raise NotImplementedError

    def _recv(self, peer: int) -> tuple[int, bytes]:
        raise NotImplementedError

    def close(self) -> None:
        pass


class SimFabric:
    """Message queues between threads of one process."""

    name = "sim"

    def __init__(self, n_parties: int, timeout: float = 120.0):
        self.n_parties = n_parties
        self.timeout = timeout
        self._boxes = {(i, j): queue.Queue() for i in range(n_parties) for j in range(n_parties) if i != j}
        self.endpoints = [SimEndpoint(self, i) for i in range(n_parties)]

    def endpoint(self, party: int) -> "SimEndpoint":
        return self.endpoints[party]

    def abort(self) -> None:
        for box in self._boxes.values():
            box.put(_CLOSED)


class SimEndpoint(Endpoint):
    def __init__(self, fabric: SimFabric, party: int):
        super().__init__(party, fabric.n_parties)
        self._fabric = fabric

    def _send(self, peer, tag, payload):
        self._fabric._boxes[(self.party, peer)].put((tag, payload))

    def _recv(self, peer):
        try:
            item = self._fabric._boxes[(peer, self.party)].get(timeout=self._fabric.timeout)
        except queue.Empty:
            raise TransportError(f"party {self.party}: timed out waiting for {peer}") from None
        if item is _CLOSED:
            raise TransportError(f"party {self.party}: fabric closed")
        return item


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise TransportError("peer closed the connection")
        buf += chunk
    return bytes(buf)


class TcpEndpoint(Endpoint):
    """One full-duplex TCP connection per peer; a reader thread per connection."""

    def __init__(self, party: int, n_parties: int, sockets: dict[int, socket.socket], timeout: float = 120.0):
        super().__init__(party, n_parties)
        self.timeout = timeout
        self._socks = sockets
        self._inbox = {j: queue.Queue() for j in sockets}
        self._locks = {j: threading.Lock() for j in sockets}
        self._readers = []
        for j, s in sockets.items():
            t = threading.Thread(target=self._read_loop, args=(j, s), daemon=True)
            t.start()
            self._readers.append(t)

    @classmethod
    def connect(
        cls,
        party: int,
        addresses: list[tuple[str, int]],
        listener: socket.socket | None = None,
        timeout: float = 120.0,
    ) -> "TcpEndpoint":
        """Lower-indexed parties accept, higher-indexed parties dial."""
        n = len(addresses)
        if listener is None:
            listener = socket.create_server(addresses[party], reuse_port=False)
        socks: dict[int, socket.socket] = {}
        for j in range(party):
            socks[j] = _dial(addresses[j], party, timeout)
        listener.settimeout(timeout)
        try:
            while len(socks) < n - 1:
                conn, _ = listener.accept()
                conn.settimeout(None)
                (peer,) = _HELLO.unpack(_recv_exact(conn, _HELLO.size))
                if not party < peer < n or peer in socks:
                    conn.close()
                    raise TransportError(f"party {party}: unexpected hello from {peer}")
                socks[peer] = conn
        except socket.timeout:
            raise TransportError(f"party {party}: peers did not connect in time") from None
        finally:
            listener.close()
        for s in socks.values():
            s.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        return cls(party, n, socks, timeout)

    def _read_loop(self, peer: int, sock: socket.socket) -> None:
        box = self._inbox[peer]
        try:
            while True:
                length, tag = _HEADER.unpack(_recv_exact(sock, _HEADER.size))
                box.put((tag, _recv_exact(sock, length)))
        except (OSError, TransportError):
            box.put(_CLOSED)

    def _send(self, peer, tag, payload):
        with self._locks[peer]:
            try:
                self._socks[peer].sendall(_HEADER.pack(len(payload), tag) + payload)
            except OSError as exc:
                raise TransportError(f"party {self.party}: send to {peer} failed: {exc}") from None

    def _recv(self, peer):
        try:
            item = self._inbox[peer].get(timeout=self.timeout)
        except queue.Empty:
            raise TransportError(f"party {self.party}: timed out waiting for {peer}") from None
        if item is _CLOSED:
            raise TransportError(f"party {self.party}: connection to {peer} lost")
        return item

    def close(self) -> None:
        for s in self._socks.values():
            try:
                s.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            s.close()


def _dial(address: tuple[str, int], party: int, timeout: float) -> socket.socket:
    deadline = time.monotonic() + timeout
    while True:
        try:
            s = socket.create_connection(address, timeout=timeout)
            break
        except OSError:
            if time.monotonic() > deadline:
                raise TransportError(f"party {party}: cannot reach {address}") from None
            time.sleep(0.05)
    s.settimeout(None)
    s.sendall(_HELLO.pack(party))
    return s


class TcpFabric:
    """Loopback TCP among threads of one process, or among processes when
    ``addresses`` come from an endpoints file."""

    name = "tcp"

    def __init__(self, n_parties: int, addresses: list[tuple[str, int]] | None = None, timeout: float = 120.0):
        self.n_parties = n_parties
        self.timeout = timeout
        self._listeners: list[socket.socket | None] = [None] * n_parties
        if addresses is None:
            addresses = []
            for i in range(n_parties):
                lst = socket.create_server(("127.0.0.1", 0))
                self._listeners[i] = lst
                addresses.append(lst.getsockname()[:2])
        if len(addresses) != n_parties:
            raise TransportError("one address per party is required")
        self.addresses = addresses
        self._endpoints: dict[int, TcpEndpoint] = {}

    def endpoint(self, party: int) -> TcpEndpoint:
        ep = TcpEndpoint.connect(party, self.addresses, self._listeners[party], self.timeout)
        self._endpoints[party] = ep
        return ep

    def abort(self) -> None:
        for ep in list(self._endpoints.values()):
            ep.close()
        for lst in self._listeners:
            if lst is not None:
                try:
                    lst.close()
                except OSError:
                    pass


def read_endpoints(path: str) -> list[tuple[str, int]]:
    """One ``host:port`` per line, in party order; blank lines and # comments ignored."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            host, _, port = line.rpartition(":")
            out.append((host or "127.0.0.1", int(port)))
    return out
