import math
import random
from collections import Counter

import pytest
import sympy
from hypothesis import given, strategies as st

from sied.errors import (
    BadRandomness,
    FormatError,
    MalformedCiphertext,
    NonDivisibleInput,
    PlaintextOutOfRange,
)
from sied.paillier import (
    PaillierCiphertext,
    PaillierPublicKey,
    PaillierSecretKey,
    check_keypair,
    decryption_trace,
    encrypt_random,
    fingerprint,
    homomorphic_add,
    is_probable_prime,
    keypair_from_primes,
    l_function,
    paillier_decrypt,
    paillier_encrypt,
    paillier_keygen,
    paillier_rerandomize,
    random_prime,
)


def test_textbook_key_for_5_and_7(tiny_keys):
    pk, sk = tiny_keys
    assert (pk.N, pk.g) == (35, 36)
    assert sk.lam == 12  # lcm(4, 6)
    assert sk.mu == 3  # L(36^12 mod 1225) = 12 and 12 * 3 = 36 = 1 mod 35


def test_encrypt_known_value(tiny_keys):
    pk, sk = tiny_keys
    # 36^3 * 2^35 mod 1225, computed with plain pow()
    c = paillier_encrypt(pk, 3, 2)
    assert c.value == 683
    assert paillier_decrypt(sk, pk, c) == 3


def test_l_function():
    assert l_function(36, 35) == 1
    assert l_function(1, 35) == 0
    with pytest.raises(NonDivisibleInput):
        l_function(37, 35)


@pytest.mark.parametrize("g", [2, 13, 36, 211])
def test_non_default_generators(g):
    pk, sk = keypair_from_primes(5, 7, g)
    for m in range(35):
        assert paillier_decrypt(sk, pk, paillier_encrypt(pk, m, 4)) == m


def test_bad_generator_is_rejected():
    # g = 1 has g^lambda = 1, so L(...) = 0 is not invertible
    with pytest.raises(ValueError):
        keypair_from_primes(5, 7, 1)
    with pytest.raises(ValueError):
        keypair_from_primes(7, 7)


@pytest.mark.parametrize("n", [2, 3, 4, 97, 561, 1105, 7919, 2 ** 61 - 1, 2 ** 61 + 1,
                               3215031751, 2 ** 127 - 1])
def test_primality_agrees_with_sympy(n):
    assert is_probable_prime(n, random.Random(0)) == sympy.isprime(n)


@given(st.integers(min_value=2, max_value=10 ** 12))
def test_primality_property(n):
    assert is_probable_prime(n, random.Random(n)) == sympy.isprime(n)


@pytest.mark.parametrize("bits", [8, 16, 64, 128])
def test_random_prime_has_exact_width(bits):
    p = random_prime(bits, random.Random(bits))
    assert p.bit_length() == bits and sympy.isprime(p)


@pytest.mark.parametrize("prime_bits", [16, 64, 128])
def test_keygen_invariants(prime_bits):
    pk, sk = paillier_keygen(prime_bits, random.Random(prime_bits))
    check_keypair(pk, sk)
    assert pk.N.bit_length() == 2 * prime_bits
    assert math.gcd(pk.N, (sk.p - 1) * (sk.q - 1)) == 1


def test_keygen_is_seed_deterministic():
    a = paillier_keygen(64, random.Random(5))
    b = paillier_keygen(64, random.Random(5))
    assert a == b


@given(m=st.integers(min_value=0), r=st.integers(min_value=1))
def test_roundtrip_property(toy_keys, m, r):
    pk, sk = toy_keys
    m %= pk.N
    r = r % (pk.N - 1) + 1
    if math.gcd(r, pk.N) != 1:
        return
    assert paillier_decrypt(sk, pk, paillier_encrypt(pk, m, r)) == m


@given(a=st.integers(min_value=0), b=st.integers(min_value=0))
def test_homomorphic_addition(toy_keys, a, b):
    pk, sk = toy_keys
    rng = random.Random(a ^ b)
    ca, _ = encrypt_random(pk, a % pk.N, rng)
    cb, _ = encrypt_random(pk, b % pk.N, rng)
    assert paillier_decrypt(sk, pk, homomorphic_add(pk, ca, cb)) == (a + b) % pk.N


def test_rerandomize_keeps_plaintext_and_multiplies_randomness(toy_keys, rng):
    pk, sk = toy_keys
    c, r = encrypt_random(pk, 42, rng)
    s = 12345
    c2 = paillier_rerandomize(pk, c, s)
    assert c2 != c
    assert paillier_decrypt(sk, pk, c2) == 42
    assert decryption_trace(sk, pk, c2)[1] == r * s % pk.N


def test_decryption_trace_recovers_randomness(toy_keys, rng):
    pk, sk = toy_keys
    for _ in range(50):
        m = rng.randrange(pk.N)
        c, r = encrypt_random(pk, m, rng)
        u, r_back = decryption_trace(sk, pk, c)
        assert r_back == r
        assert u * sk.mu % pk.N == m


def test_operation_counter(toy_keys, rng):
    pk, sk = toy_keys
    counter = Counter()
    c, _ = encrypt_random(pk, 5, rng, counter)
    paillier_decrypt(sk, pk, c, counter)
    assert counter["encrypt"] == 1 and counter["decrypt"] == 1
    trace_counter = Counter()
    decryption_trace(sk, pk, c, trace_counter)
    assert trace_counter["decrypt"] == 1


@pytest.mark.parametrize("m", [-1, 35, 100])
def test_plaintext_range(tiny_keys, m):
    pk, _ = tiny_keys
    with pytest.raises(PlaintextOutOfRange):
        paillier_encrypt(pk, m, 2)


@pytest.mark.parametrize("r", [0, 5, 7, 35, 36])
def test_randomness_must_be_a_unit(tiny_keys, r):
    pk, _ = tiny_keys
    with pytest.raises(BadRandomness):
        paillier_encrypt(pk, 1, r)


@pytest.mark.parametrize("value", [0, 5, 1225, 1300])
def test_malformed_ciphertexts(tiny_keys, value):
    pk, sk = tiny_keys
    with pytest.raises(MalformedCiphertext):
        paillier_decrypt(sk, pk, PaillierCiphertext(value))


def test_key_and_ciphertext_records(small_keys, rng):
    pk, sk = small_keys
    rec = pk.to_record()
    assert rec["kind"] == "paillier-pk" and rec["N"] == format(pk.N, "x")
    assert PaillierPublicKey.from_record(rec) == pk
    srec = sk.to_record()
    assert set(srec) >= {"p", "q", "lambda", "mu"}
    assert PaillierSecretKey.from_record(srec) == sk
    c, _ = encrypt_random(pk, 7, rng)
    assert PaillierCiphertext.from_record(c.to_record()) == c
    assert len(c.to_bytes(pk)) == pk.ciphertext_bytes


@pytest.mark.parametrize("rec", [{"kind": "paillier-sk"}, {"kind": "paillier-pk", "N": "zz",
                                                             "g": "1"}, {}])
def test_bad_public_key_records(rec):
    with pytest.raises(FormatError):
        PaillierPublicKey.from_record(rec)


def test_fingerprint_is_stable(tiny_keys):
    pk, _ = tiny_keys
    assert fingerprint(pk) == fingerprint(PaillierPublicKey(35, 36))
    assert len(fingerprint(pk)) == 16
