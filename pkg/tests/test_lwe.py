import numpy as np
import pytest
from hypothesis import given, strategies as st

from sied.errors import FormatError, RetryLimitExceeded
from sied.lwe import (
    LweBatch,
    LweCiphertext,
    LweParams,
    LweSecretKey,
    centered,
    lwe_decrypt,
    lwe_decrypt_many,
    lwe_embed_bit,
    lwe_embed_many,
    lwe_encrypt,
    lwe_encrypt_many,
    lwe_extract_many,
    lwe_keygen,
    lwe_noise,
    lwe_noise_many,
    round_half_down,
)


@pytest.mark.parametrize("num,den,expected", [(0, 5, 0), (2, 5, 0), (3, 5, 1), (5, 10, 0),
                                              (15, 10, 1), (16, 10, 2), (25, 10, 2)])
def test_round_half_down(num, den, expected):
    assert round_half_down(num, den) == expected


@given(st.integers(-10 ** 6, 10 ** 6), st.sampled_from([3, 7, 12289]))
def test_centered_range(v, q):
    c = int(centered(v, q))
    assert -q // 2 < c <= q // 2
    assert (c - v) % q == 0


@pytest.mark.parametrize("m", [0, 1])
def test_scalar_roundtrip(lwe_key, nprng, m):
    ct, noise = lwe_encrypt(lwe_key, m, nprng)
    assert lwe_decrypt(lwe_key, ct) == m
    assert lwe_noise(lwe_key, ct) == noise.e


def test_pinned_zero_noise(lwe_key, nprng):
    ct, noise = lwe_encrypt(lwe_key, 1, nprng, noise=0)
    assert noise.e == 0 and lwe_noise(lwe_key, ct) == 0


def test_batch_roundtrip(lwe_key, nprng):
    m = nprng.integers(0, 2, 5000)
    batch, e = lwe_encrypt_many(lwe_key, m, nprng)
    assert np.array_equal(lwe_decrypt_many(lwe_key, batch), m)
    assert np.array_equal(lwe_noise_many(lwe_key, batch), e)


@given(seed=st.integers(0, 2 ** 32), size=st.integers(0, 64))
def test_embed_property(lwe_key, seed, size):
    rng = np.random.default_rng(seed)
    m = rng.integers(0, 2, size)
    payload = rng.integers(0, 2, size)
    batch, e, draws = lwe_embed_many(lwe_key, m, payload, rng)
    assert np.array_equal(lwe_decrypt_many(lwe_key, batch), m)
    assert np.array_equal(lwe_extract_many(lwe_key, batch), payload)
    assert np.array_equal(e % 2, payload)
    assert (draws >= 1).all()


def test_embedded_noise_has_one_parity(lwe_key, nprng):
    batch, _, draws = lwe_embed_many(lwe_key, np.zeros(4000, int), np.zeros(4000, int), nprng)
    noise = lwe_noise_many(lwe_key, batch)
    assert (noise % 2 == 0).all()
    # a rounded Gaussian with sigma 3.2 is even about half the time
    assert 1.8 < draws.mean() < 2.2


def test_scalar_embed(lwe_key, nprng):
    ct, sample = lwe_embed_bit(lwe_key, 1, 1, nprng)
    assert lwe_decrypt(lwe_key, ct) == 1 and sample.e % 2 == 1


def test_retry_limit(lwe_key):
    rng = np.random.default_rng(0)
    with pytest.raises(RetryLimitExceeded):
        lwe_embed_many(lwe_key, np.zeros(200, int), np.ones(200, int), rng, max_draws=1)


@pytest.mark.parametrize("bad", [(2, 1), (0, 2), (-1, 0)])
def test_bit_validation(lwe_key, nprng, bad):
    with pytest.raises(ValueError):
        lwe_embed_bit(lwe_key, *bad, nprng)


def test_shape_mismatch(lwe_key, nprng):
    with pytest.raises(ValueError):
        lwe_embed_many(lwe_key, [0, 1], [1], nprng)


@pytest.mark.parametrize("kwargs", [{"n": 0}, {"q": 1024}, {"q": 1}, {"sigma": 0},
                                    {"q": 17, "sigma": 3.0}])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        LweParams(**kwargs)


def test_params_sizes():
    p = LweParams()
    assert p.half == 6144
    assert p.residue_bytes == 2
    assert p.ciphertext_bytes == 66


def test_records(lwe_key, nprng):
    assert LweSecretKey.from_record(lwe_key.to_record()) == lwe_key
    ct, _ = lwe_encrypt(lwe_key, 0, nprng)
    assert LweCiphertext.from_record(ct.to_record(lwe_key.params)) == ct
    batch = LweBatch.from_ciphertexts([ct], lwe_key.params)
    assert batch.ciphertexts() == [ct]
    assert len(LweBatch.from_ciphertexts([], lwe_key.params)) == 0


@pytest.mark.parametrize("rec", [{"kind": "paillier-sk"},
                                 {"kind": "lwe-sk", "params": {"n": 2, "q": 13}, "s": [1]},
                                 {"kind": "lwe-sk", "params": {"n": 1, "q": 13}, "s": [13]},
                                 {"kind": "lwe-sk", "params": {}, "s": []}])
def test_bad_key_records(rec):
    with pytest.raises(FormatError):
        LweSecretKey.from_record(rec)


def test_keygen_is_seed_deterministic():
    a = lwe_keygen(LweParams(n=8), np.random.default_rng(3))
    b = lwe_keygen(LweParams(n=8), np.random.default_rng(3))
    assert a == b and len(a.s) == 8
