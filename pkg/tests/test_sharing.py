import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpcmp.algebra import PrimeField, Ring, gf2s_mul
from mpcmp.errors import Incomplete, InvalidArgument
from mpcmp.sharing import (
    AuthShare,
    MacKey,
    Scheme,
    ShareOps,
    affine_combine,
    deal_additive,
    deal_authenticated,
    deal_bits_by_party,
    mac_holds,
    mask_pair,
    public_sharing,
    reconstruct,
    reconstruct_mac,
    reconstruct_masked,
)


def key_for(scheme, n, seed=0):
    return MacKey.generate(scheme.mac, n, random.Random(seed)) if scheme.active else None


SCHEMES = [
    Scheme.field(13),
    Scheme.field(13, True),
    Scheme.field(2**61 - 1, True),
    Scheme.ring(4, True),
    Scheme.ring(64, True),
    Scheme.ring(32),
    Scheme.bits(),
    Scheme.bits(True),
]


def test_deal_additive_examples(rng):
    shares = deal_additive(7, 3, rng, PrimeField(13))
    assert len(shares) == 3 and sum(shares) % 13 == 7
    bits = deal_additive(1, 4, rng)
    assert sum(bits) % 2 == 1
    with pytest.raises(InvalidArgument):
        deal_additive(1, 1, rng)


def test_mac_example_field():
    scheme = Scheme.field(13, True)
    key = MacKey(PrimeField(13), (2, 3))
    shares = deal_authenticated(7, 2, key, random.Random(1), scheme)
    assert reconstruct_mac(scheme, shares) == 9
    zero = deal_authenticated(0, 2, key, random.Random(2), scheme)
    assert reconstruct_mac(scheme, zero) == 0


def test_mac_example_bits():
    scheme = Scheme.bits(True)
    key = key_for(scheme, 3)
    shares = deal_authenticated(1, 3, key, random.Random(3), scheme)
    assert reconstruct_mac(scheme, shares) == key.total


def test_key_domain_mismatch():
    with pytest.raises(InvalidArgument):
        deal_authenticated(1, 3, MacKey(PrimeField(61), (1, 2, 3)), random.Random(), Scheme.field(13, True))


def test_generated_key_is_nonzero():
    for seed in range(200):
        assert MacKey.generate(PrimeField(13), 2, random.Random(seed)).total != 0


@pytest.mark.parametrize("scheme", SCHEMES, ids=repr)
def test_deal_reconstruct_and_mac(scheme):
    r = random.Random(11)
    key = key_for(scheme, 4)
    for _ in range(50):
        x = r.randrange(scheme.plain_modulus)
        shares = deal_authenticated(x, 4, key, r, scheme)
        assert reconstruct(scheme, shares) == x
        if scheme.active:
            assert mac_holds(scheme, shares, key)


def test_active_ring_shares_are_wide():
    scheme = Scheme.ring(32, True, s=40)
    assert scheme.share == Ring(72) and scheme.mac == Ring(72)
    key = key_for(scheme, 3)
    shares = deal_authenticated(5, 3, key, random.Random(4), scheme)
    assert reconstruct(scheme, shares) == 5


def test_missing_share_is_incomplete():
    scheme = Scheme.field(13)
    shares = deal_authenticated(3, 3, None, random.Random(), scheme)
    with pytest.raises(Incomplete):
        reconstruct(scheme, shares[:2], n_parties=3)
    with pytest.raises(Incomplete):
        reconstruct(scheme, [shares[0], None, shares[2]])


def _per_party_affine(scheme, key, shares_by_term, coeffs, const):
    n = len(shares_by_term[0])
    alphas = key.shares if key else [None] * n
    return [
        affine_combine(scheme, coeffs, [t[i] for t in shares_by_term], const, i, alphas[i])
        for i in range(n)
    ]


def test_affine_example_field():
    scheme = Scheme.field(13, True)
    key = key_for(scheme, 3)
    r = random.Random(5)
    x3 = deal_authenticated(3, 3, key, r, scheme)
    x4 = deal_authenticated(4, 3, key, r, scheme)
    out = _per_party_affine(scheme, key, [x3, x4], [2, 5], 1)
    assert reconstruct(scheme, out) == 1
    assert mac_holds(scheme, out, key)
    ident = _per_party_affine(scheme, key, [x3], [1], 0)
    assert ident == x3


def test_affine_parity_bits():
    scheme = Scheme.bits(True)
    key = key_for(scheme, 3)
    r = random.Random(6)
    for bits in ([0, 0, 0], [1, 0, 1], [1, 1, 1], [0, 1, 0]):
        terms = [deal_authenticated(b, 3, key, r, scheme) for b in bits]
        out = _per_party_affine(scheme, key, terms, [1, 1, 1], 0)
        assert reconstruct(scheme, out) == sum(bits) % 2
        assert mac_holds(scheme, out, key)


@given(
    st.integers(0, 2**16),
    st.integers(0, 2**16),
    st.integers(-50, 50),
    st.integers(-50, 50),
    st.integers(0, 2**16),
)
def test_affine_is_linear_over_ring(x, y, a, b, c):
    scheme = Scheme.ring(16, True, s=16)
    key = key_for(scheme, 3, seed=x)
    r = random.Random(y)
    xs = deal_authenticated(x, 3, key, r, scheme)
    ys = deal_authenticated(y, 3, key, r, scheme)
    out = _per_party_affine(scheme, key, [xs, ys], [a, b], c)
    assert reconstruct(scheme, out) == (a * x + b * y + c) % 2**16
    assert mac_holds(scheme, out, key)


def test_constants_and_ops():
    scheme = Scheme.field(61, True)
    key = key_for(scheme, 3)
    pub = public_sharing(scheme, 17, key, 3)
    assert reconstruct(scheme, pub) == 17 and mac_holds(scheme, pub, key)
    ops = [ShareOps(scheme, i, key.shares[i]) for i in range(3)]
    x = deal_authenticated(40, 3, key, random.Random(1), scheme)
    y = deal_authenticated(30, 3, key, random.Random(2), scheme)
    cases = {
        "add": ([o.add(a, b) for o, a, b in zip(ops, x, y)], 70 % 61),
        "sub": ([o.sub(a, b) for o, a, b in zip(ops, x, y)], 10),
        "neg": ([o.neg(a) for o, a in zip(ops, x)], 21),
        "scale": ([o.scale(a, 3) for o, a in zip(ops, x)], 120 % 61),
        "add_const": ([o.add_const(a, 25) for o, a in zip(ops, x)], 4),
    }
    for name, (shares, want) in cases.items():
        assert reconstruct(scheme, shares) == want, name
        assert mac_holds(scheme, shares, key), name


def test_mask_pair_examples():
    f = Scheme.field(13)
    views = mask_pair(0, None, random.Random(), f, 3, sigma=5)
    assert views[0].delta == 5 and reconstruct_masked(f, views) == 0
    ring = Scheme.ring(4)
    views = mask_pair(9, None, random.Random(), ring, 3, sigma=14)
    assert views[0].delta == 7 and reconstruct_masked(ring, views) == 9
    bits = Scheme.bits(True)
    key = key_for(bits, 3)
    views = mask_pair(1, key, random.Random(), bits, 3, sigma=1)
    assert views[0].delta == 0 and reconstruct_masked(bits, views) == 1


def test_masked_views_must_agree():
    f = Scheme.field(13)
    views = mask_pair(3, None, random.Random(), f, 2)
    bad = [views[0], type(views[1])(views[1].delta + 1, views[1].sigma)]
    with pytest.raises(InvalidArgument):
        reconstruct_masked(f, bad)


@pytest.mark.parametrize("active", [False, True])
def test_bulk_bit_sharing(active):
    scheme = Scheme.bits(active)
    key = key_for(scheme, 4)
    r = random.Random(9)
    secrets = [r.getrandbits(1) for _ in range(301)]
    rows = deal_bits_by_party(secrets, 4, key, r, scheme)
    assert len(rows) == 4 and all(len(row) == 301 for row in rows)
    for j, s in enumerate(secrets):
        col = [row[j] for row in rows]
        assert reconstruct(scheme, col) == s
        if active:
            assert mac_holds(scheme, col, key)
            assert reconstruct_mac(scheme, col) == gf2s_mul(s, key.total)


def test_auth_share_is_immutable():
    s = AuthShare(1, 2)
    with pytest.raises(AttributeError):
        s.value = 3
