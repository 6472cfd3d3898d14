"""End-to-end execution of one protocol batch: the dealer prepares tapes, an
input client shares the inputs, every party runs online over a fabric, and
the outputs are reconstructed.

Inputs to the masked-bit protocols (AND, prefix, binary LTBits) arrive as
public masked bits x xor sigma, with sigma the dealer's input-wire mask given
to the input owner.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Sequence

from .abb import ABB, Tamper
from .dealer import Dealer
from .errors import InvalidArgument
from .protocols import (
    and_m_batch,
    ltbits_2n_batch,
    ltbits_p_batch,
    masked_inputs,
    msb_2k_batch,
    msb_p_batch,
    prefix_and_online,
)
from .sharing import MacKey, MaskedValue, Scheme, deal_authenticated, reconstruct, reconstruct_masked
from .transport import CostReport, run_parties

PROTOCOLS = ("ltbits_p", "ltbits_2n", "prefix_and", "and_m", "msb_p", "msb_2k")


@dataclass(frozen=True)
class Params:
    protocol: str
    n_parties: int = 3
    active: bool = False
    p: int | None = None
    # bit length for comparisons / prefix length / AND arity
    ell: int | None = None
    # ring width for msb_2k
    k: int | None = None
    n_branch: int = 2
    s: int = 64

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise InvalidArgument(f"unknown protocol {self.protocol!r}")
        if self.n_parties < 2:
            raise InvalidArgument("at least two parties are required")
        need = {
            "ltbits_p": ("p", "ell"),
            "ltbits_2n": ("ell",),
            "prefix_and": ("ell",),
            "and_m": ("ell",),
            "msb_p": ("p",),
            "msb_2k": ("k",),
        }[self.protocol]
        for name in need:
            if getattr(self, name) is None:
                raise InvalidArgument(f"{self.protocol} needs parameter {name}")

    @property
    def field(self) -> Scheme:
        return Scheme.field(self.p, self.active)

    @property
    def ring(self) -> Scheme:
        return Scheme.ring(self.k, self.active, self.s)

    @property
    def bits(self) -> Scheme:
        return Scheme.bits(self.active)


@dataclass
class PartyJob:
    party: int
    alphas: dict
    tapes: list
    inputs: list
    constants: list[int] = field(default_factory=list)


@dataclass
class Outcome:
    outputs: list[Any]
    report: CostReport
    opened_elements: int
    transcripts: list
    shares: list[list[Any]]
    # open rounds before the closing MAC check
    opens: int = 0


@dataclass
class Preprocessing:
    """Dealer output for a batch: per-party tapes and key shares, plus the
    plaintext input-wire masks handed to the input owner (masked-bit protocols)."""

    params: Params
    tapes: list[list]
    alphas: list[dict]
    owner_masks: list[list[int]] = field(default_factory=list)
    nonce: int = 0

    @property
    def batch(self) -> int:
        return len(self.tapes[0])


def preprocess(params: Params, batch: int, rng: random.Random) -> Preprocessing:
    n = params.n_parties
    dealer = Dealer(n, params.active, rng, params.s)
    proto = params.protocol
    tapes: list[list] = [[] for _ in range(n)]
    owner: list[list[int]] = []
    for _ in range(batch):
        if proto == "ltbits_p":
            per = dealer.gen_power_tape(params.ell, params.p)
        elif proto in ("ltbits_2n", "prefix_and"):
            per, sigma = dealer.gen_prefix_tape(params.ell, params.n_branch)
            owner.append(sigma)
        elif proto == "and_m":
            m = params.ell
            sigma = [dealer.rng.getrandbits(1) for _ in range(m)]
            mask_rows = dealer.share_bits(sigma)
            per, _ = dealer.gen_and_tape(m, sigma)
            for t, row in zip(per, mask_rows):
                t.input_masks = row
            owner.append(sigma)
        elif proto == "msb_p":
            per = dealer.gen_msb_p_tape(params.p)
        else:
            per = dealer.gen_msb_2k_tape(params.k, params.n_branch)
        for i in range(n):
            tapes[i].append(per[i])
    if params.active:
        # make sure the input client has a key for the input domain
        dealer.key(params.field if proto in ("ltbits_p", "msb_p") else params.ring if proto == "msb_2k" else params.bits)
    nonce = dealer.rng.getrandbits(64)
    return Preprocessing(params, tapes, [dealer.alphas(i) for i in range(n)], owner, nonce)


def input_key(prep: Preprocessing, scheme: Scheme) -> MacKey | None:
    """The session MAC key for ``scheme``, rebuilt from the parties' key shares."""
    if not scheme.active:
        return None
    return MacKey(scheme.mac, tuple(a[scheme.mac] for a in prep.alphas))


def share_inputs(params: Params, prep: Preprocessing, inputs: Sequence, rng: random.Random) -> list[PartyJob]:
    """Input-client step: share (or mask) each batch item against the tapes.

    ``inputs`` items: ``(x, R)`` for the comparisons, a bit list for
    ``prefix_and`` / ``and_m``, and an integer for the MSB protocols.
    """
    if len(inputs) != prep.batch:
        raise InvalidArgument(f"{len(inputs)} inputs for a batch of {prep.batch}")
    n = params.n_parties
    proto = params.protocol
    shared: list[list] = [[] for _ in range(n)]
    constants: list[int] = []

    def client_share(scheme: Scheme, value: int):
        return deal_authenticated(value, n, input_key(prep, scheme), rng, scheme)

    for b, item in enumerate(inputs):
        if proto == "ltbits_p":
            x, R = item
            bits = [client_share(params.field, (x >> i) & 1) for i in range(params.ell)]
            for i in range(n):
                shared[i].append([sh[i] for sh in bits])
            constants.append(R)
        elif proto == "ltbits_2n":
            x, R = item
            sigma = prep.owner_masks[b]
            # LSB-first; bit i is masked by prefix position ell-1-i
            deltas = [((x >> i) & 1) ^ sigma[params.ell - 1 - i] for i in range(params.ell)]
            for i in range(n):
                shared[i].append(deltas)
            constants.append(R)
        elif proto == "prefix_and":
            deltas = [(v & 1) ^ s for v, s in zip(item, prep.owner_masks[b])]
            for i in range(n):
                shared[i].append(deltas)
        elif proto == "and_m":
            deltas = [(v & 1) ^ s for v, s in zip(item, prep.owner_masks[b])]
            for i in range(n):
                masks = prep.tapes[i][b].input_masks
                shared[i].append([MaskedValue(d, sh, w) for w, (d, sh) in enumerate(zip(deltas, masks))])
        else:
            scheme = params.field if proto == "msb_p" else params.ring
            xs = client_share(scheme, item)
            for i in range(n):
                shared[i].append(xs[i])
    return [PartyJob(i, prep.alphas[i], prep.tapes[i], shared[i], list(constants)) for i in range(n)]


def deal(params: Params, inputs: Sequence, dealer_rng: random.Random, input_rng: random.Random) -> list[PartyJob]:
    """Preprocess for a batch and share the inputs."""
    return share_inputs(params, preprocess(params, len(inputs), dealer_rng), inputs, input_rng)


def online(params: Params, abb: ABB, job: PartyJob) -> list:
    """One party's online phase for the whole batch, closed by the MAC check."""
    proto = params.protocol
    bits = params.bits
    if proto == "ltbits_p":
        out = ltbits_p_batch(abb, params.field, job.inputs, job.constants, job.tapes)
    elif proto == "ltbits_2n":
        xs = [masked_inputs(t, d) for t, d in zip(job.tapes, job.inputs)]
        out = ltbits_2n_batch(abb, bits, xs, job.constants, job.tapes)
    elif proto == "prefix_and":
        xs = [[MaskedValue(d, t.input_masks[j], j) for j, d in enumerate(ds)] for t, ds in zip(job.tapes, job.inputs)]
        out = prefix_and_online(abb, bits, xs, job.tapes)
    elif proto == "and_m":
        out = and_m_batch(abb, bits, job.inputs, job.tapes)
    elif proto == "msb_p":
        out = msb_p_batch(abb, params.field, job.inputs, job.tapes)
    else:
        out = msb_2k_batch(abb, params.ring, bits, job.inputs, job.tapes)
    abb.check()
    return out


def output_scheme(params: Params) -> Scheme:
    if params.protocol in ("ltbits_p", "msb_p"):
        return params.field
    if params.protocol == "msb_2k":
        return params.ring
    return params.bits


def reconstruct_outputs(params: Params, shares: list[list]) -> list:
    scheme = output_scheme(params)
    n_out = len(shares[0])
    out = []
    for j in range(n_out):
        views = [s[j] for s in shares]
        if params.protocol == "prefix_and":
            out.append([reconstruct_masked(scheme, [v[t] for v in views]) for t in range(len(views[0]))])
        elif isinstance(views[0], MaskedValue):
            out.append(reconstruct_masked(scheme, views))
        else:
            out.append(reconstruct(scheme, views))
    return out


def execute(
    params: Params,
    jobs: list[PartyJob],
    fabric: str = "sim",
    tamper: tuple[int, Tamper] | None = None,
    addresses=None,
) -> Outcome:
    opened = [0] * params.n_parties
    opens = [0] * params.n_parties

    def role(i, endpoint):
        abb = ABB(i, params.n_parties, endpoint, jobs[i].alphas, tamper[1] if tamper and tamper[0] == i else None)
        out = online(params, abb, jobs[i])
        opened[i] = abb.opened_elements
        opens[i] = abb.opens
        return out

    res = run_parties(params.n_parties, role, fabric, addresses)
    return Outcome(reconstruct_outputs(params, res.outputs), res.report, opened[0], res.transcripts, res.outputs, opens[0])


def run(
    params: Params,
    inputs: Sequence,
    seed: int | str | None = None,
    fabric: str = "sim",
    tamper: tuple[int, Tamper] | None = None,
) -> Outcome:
    """Deal, execute and reconstruct in one call; ``seed`` fixes all randomness."""
    if seed is None:
        seed = random.SystemRandom().getrandbits(64)
    jobs = deal(params, inputs, random.Random(f"dealer:{seed}"), random.Random(f"input:{seed}"))
    return execute(params, jobs, fabric, tamper)
