import random
import struct

import pytest

from mpcmp import Params
from mpcmp import session as sess
from mpcmp.dealer import Dealer
from mpcmp.errors import TapeError
from mpcmp.tapes import (
    BASIC_FIELD,
    BASIC_RING,
    HEADER,
    MAGIC,
    NonceRegistry,
    TapeFile,
    decode_tape,
    encode_tape,
    load_tape,
    ring_header,
    tape_path,
    write_tape,
)


def _tapes(kind, active, n=3, seed=0):
    d = Dealer(n, active, random.Random(seed), s=32)
    if kind == "power":
        items = [d.gen_power_tape(4, 61) for _ in range(2)]
        header = dict(modulus=61, ell=4)
    elif kind == "and":
        items = []
        for _ in range(3):
            sigma = [1, 0, 1]
            per, _ = d.gen_and_tape(3, sigma)
            for t, row in zip(per, d.share_bits(sigma)):
                t.input_masks = row
            items.append(per)
        header = dict(arity=3)
    elif kind == "prefix":
        items = [d.gen_prefix_tape(11, 3)[0] for _ in range(2)]
        header = dict(ell=11, n_branch=3)
    elif kind == "msb_p":
        items = [d.gen_msb_p_tape(61) for _ in range(2)]
        header = dict(modulus=61, ell=6)
    elif kind == "msb_2k":
        items = [d.gen_msb_2k_tape(16, 4) for _ in range(2)]
        width, k = ring_header(16, active, 32)
        header = dict(modulus=width, ell=k, n_branch=4)
    elif kind == "basic_field":
        items = [d.gen_basic_tapes(d.field_scheme(2**61 - 1), 3, 2, 1)]
        header = dict(modulus=2**61 - 1, arity=BASIC_FIELD)
        kind = "basic"
    else:
        items = [d.gen_basic_tapes(d.ring_scheme(20), 2, 2, 2)]
        width, k = ring_header(20, active, 32)
        header = dict(modulus=width, ell=k, arity=BASIC_RING)
        kind = "basic"
    return [
        TapeFile(kind, n, i, active, nonce=0xABCDEF, items=[it[i] for it in items], alphas=d.alphas(i), **header)
        for i in range(n)
    ]


KINDS = ["power", "and", "prefix", "msb_p", "msb_2k", "basic_field", "basic_ring"]


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("active", [False, True])
def test_round_trip(kind, active):
    for tf in _tapes(kind, active):
        data = encode_tape(tf)
        back = decode_tape(data)
        assert back == tf
        assert encode_tape(back) == data


def test_header_layout():
    tf = _tapes("power", False)[1]
    data = encode_tape(tf)
    fields = HEADER.unpack_from(data)
    assert fields[0] == MAGIC
    # version, protocol id, parties, party, mode, modulus, ell, n_branch, arity, batch, nonce
    assert fields[1:] == (1, 1, 3, 1, 0, 61, 4, 0, 0, 2, 0xABCDEF)


def test_corrupt_and_truncated():
    data = encode_tape(_tapes("prefix", True)[0])
    with pytest.raises(TapeError):
        decode_tape(b"XXXXXXXX" + data[8:])
    with pytest.raises(TapeError):
        decode_tape(data[:-1])
    with pytest.raises(TapeError):
        decode_tape(data + b"\x00")
    with pytest.raises(TapeError):
        decode_tape(data[:10])
    bad_version = data[:8] + struct.pack("<H", 9) + data[10:]
    with pytest.raises(TapeError):
        decode_tape(bad_version)


def test_load_checks_party_and_nonce(tmp_path):
    tapes = _tapes("and", False)
    for tf in tapes:
        write_tape(tf, tape_path(tmp_path, "and_m", tf.party))
    p0, p1 = tape_path(tmp_path, "and_m", 0), tape_path(tmp_path, "and_m", 1)
    with pytest.raises(TapeError):
        load_tape(p0, 3)
    with pytest.raises(TapeError):
        load_tape(p0, 1)
    load_tape(p0, 0, registry=None)
    assert load_tape(p0, 0) == tapes[0]
    with pytest.raises(TapeError):
        load_tape(p0, 0)
    load_tape(p1, 1)
    reg = NonceRegistry(tmp_path / ".consumed")
    assert len(reg.seen()) == 2
    reg.forget(0xABCDEF)
    assert reg.seen() == set()
    load_tape(p0, 0)


def test_missing_file(tmp_path):
    with pytest.raises(TapeError):
        load_tape(tmp_path / "nope.tape", 0)


@pytest.mark.parametrize("protocol,extra,inputs", [
    ("msb_2k", {"k": 12, "n_branch": 3}, [5, 4000]),
    ("ltbits_2n", {"ell": 5}, [(3, 9), (20, 4)]),
    ("and_m", {"ell": 3}, [[1, 1, 1], [1, 0, 1]]),
    ("msb_p", {"p": 61}, [10, 40]),
])
def test_decoded_tapes_drive_a_run(protocol, extra, inputs):
    params = Params(protocol, n_parties=3, active=True, **extra)
    prep = sess.preprocess(params, len(inputs), random.Random(1))
    files = [
        decode_tape(encode_tape(TapeFile(t, 3, i, True, nonce=prep.nonce, items=prep.tapes[i], alphas=prep.alphas[i], **h)))
        for i, (t, h) in enumerate([_header(params)] * 3)
    ]
    prep.tapes = [f.items for f in files]
    prep.alphas = [f.alphas for f in files]
    jobs = sess.share_inputs(params, prep, inputs, random.Random(2))
    direct = sess.run(params, inputs, seed=3)
    assert sess.execute(params, jobs).outputs == direct.outputs


def _header(params):
    from mpcmp.cli import TAPE_KIND, _tape_header

    return TAPE_KIND[params.protocol], _tape_header(params)
