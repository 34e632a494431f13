import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from sied.errors import LengthMismatch, RetryLimitExceeded
from sied.evr import (
    EvrConfig,
    RetryTrace,
    evr_embed_bit,
    evr_embed_cover,
    evr_embed_covers,
    evr_embed_message,
    evr_extract_message,
    read_bits,
    refresh_count_pmf,
)
from sied.paillier import PaillierCiphertext, decryption_trace, encrypt_random, paillier_decrypt


@pytest.mark.parametrize("refresh", ["rerandomize", "reencrypt"])
@pytest.mark.parametrize("b", [0, 1])
def test_single_bit_embed(toy_keys, refresh, b):
    pk, sk = toy_keys
    rng = random.Random(b)
    c, count = evr_embed_bit(pk, 99, b, EvrConfig(refresh=refresh), rng)
    assert c.lsb == b
    assert paillier_decrypt(sk, pk, c) == 99
    assert count >= 0


@pytest.mark.parametrize("positions", [(0,), (0, 1), (3, 17), (0, 5, 9)])
def test_message_roundtrip_over_positions(toy_keys, positions):
    pk, sk = toy_keys
    rng = random.Random(len(positions))
    cfg = EvrConfig(positions=positions)
    plaintexts = [rng.randrange(pk.N) for _ in range(40)]
    bits = [rng.getrandbits(1) for _ in range(40 * len(positions))]
    stegos, trace = evr_embed_message(pk, plaintexts, bits, cfg, rng)
    assert evr_extract_message(stegos, cfg) == bits
    assert [paillier_decrypt(sk, pk, c) for c in stegos] == plaintexts
    assert len(trace) == 40


@given(bits=st.lists(st.integers(0, 1), min_size=0, max_size=24), seed=st.integers(0, 2 ** 32))
def test_roundtrip_property(toy_keys, bits, seed):
    pk, sk = toy_keys
    rng = random.Random(seed)
    plaintexts = [rng.randrange(pk.N) for _ in bits]
    stegos, _ = evr_embed_message(pk, plaintexts, bits, EvrConfig(), rng)
    assert evr_extract_message(stegos) == bits
    assert [paillier_decrypt(sk, pk, c) for c in stegos] == plaintexts


def test_bit_order_within_group(toy_keys):
    pk, _ = toy_keys
    cfg = EvrConfig(positions=(2, 7))
    stegos, _ = evr_embed_message(pk, [5, 6], [1, 0, 0, 1], cfg, random.Random(3))
    assert read_bits(stegos[0].value, (2, 7)) == (1, 0)
    assert read_bits(stegos[1].value, (2, 7)) == (0, 1)


def test_keyless_embedding_uses_only_the_modulus(toy_keys):
    pk, sk = toy_keys
    rng = random.Random(8)
    covers = [encrypt_random(pk, m, rng)[0] for m in range(30)]
    bits = [rng.getrandbits(1) for _ in range(30)]
    counter = Counter()
    stegos, trace = evr_embed_covers(pk.N, covers, bits, EvrConfig(), rng, counter)
    assert evr_extract_message(stegos) == bits
    assert [paillier_decrypt(sk, pk, c) for c in stegos] == list(range(30))
    assert counter["rerandomize"] == sum(trace.counts)
    assert counter["encrypt"] == 0


def test_matching_cover_is_returned_unchanged(toy_keys):
    pk, _ = toy_keys
    rng = random.Random(9)
    cover, _ = encrypt_random(pk, 1, rng)
    stego, count = evr_embed_cover(pk.N, cover, (cover.lsb,), EvrConfig(), rng)
    assert count == 0 and stego == cover


def test_refresh_changes_randomness(toy_keys):
    pk, sk = toy_keys
    rng = random.Random(10)
    cover, r = encrypt_random(pk, 1, rng)
    stego, count = evr_embed_cover(pk.N, cover, (1 - cover.lsb,), EvrConfig(), rng)
    assert count >= 1
    assert decryption_trace(sk, pk, stego)[1] != r


def test_retry_limit(toy_keys):
    pk, _ = toy_keys
    cfg = EvrConfig(positions=tuple(range(12)), max_retries=2)
    with pytest.raises(RetryLimitExceeded) as info:
        evr_embed_message(pk, [1, 2, 3], [1] * 36, cfg, random.Random(0))
    assert info.value.index is not None


def test_length_mismatch(toy_keys):
    pk, _ = toy_keys
    with pytest.raises(LengthMismatch):
        evr_embed_message(pk, [1, 2], [0, 1, 1], EvrConfig(), random.Random(0))
    with pytest.raises(LengthMismatch):
        evr_embed_cover(pk.N, PaillierCiphertext(4), (0, 1), EvrConfig(), random.Random(0))


@pytest.mark.parametrize("kwargs", [{"positions": ()}, {"positions": (3, 1)},
                                    {"positions": (-1,)}, {"max_retries": 0},
                                    {"refresh": "magic"}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EvrConfig(**kwargs)


def test_position_beyond_modulus(tiny_keys):
    pk, _ = tiny_keys
    with pytest.raises(ValueError):
        evr_embed_message(pk, [1], [1], EvrConfig(positions=(20,)), random.Random(0))


def test_extraction_is_total():
    # any integer is a valid input; extraction never fails
    assert evr_extract_message([PaillierCiphertext(0b1011)], EvrConfig(positions=(0, 2))) == [1, 0]
    assert evr_extract_message([]) == []


@pytest.mark.parametrize("k", [1, 2, 3])
def test_refresh_pmf_is_geometric(k):
    p = 2.0 ** -k
    total = sum(refresh_count_pmf(j, k) for j in range(400))
    mean = sum(j * refresh_count_pmf(j, k) for j in range(400))
    assert total == pytest.approx(1.0)
    assert mean == pytest.approx((1 - p) / p)


def test_two_position_mean_refreshes(toy_keys):
    pk, _ = toy_keys
    rng = random.Random(4)
    n = 3000
    cfg = EvrConfig(positions=(0, 1))
    _, trace = evr_embed_message(pk, [rng.randrange(pk.N) for _ in range(n)],
                                 [rng.getrandbits(1) for _ in range(2 * n)], cfg, rng)
    # geometric with success 1/4: mean 3, standard error about 0.06
    assert abs(trace.mean - 3.0) < 0.25


def test_retry_trace_invocations():
    t = RetryTrace((0, 2, 1))
    assert t.invocations == [1, 3, 2]
    assert t.mean == 1.0
    assert RetryTrace().mean == 0.0
