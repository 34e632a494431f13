"""Paillier cryptosystem over arbitrary-precision integers.

Key generation, encryption, decryption and the ``L`` function follow the
textbook construction with the ``lambda`` exponent in decryption::

    c = g^m * r^N mod N^2
    m = L(c^lambda mod N^2) * mu mod N,   mu = L(g^lambda mod N^2)^-1 mod N

Ciphertexts can also be re-randomized without the plaintext (``c * s^N``),
which is what the refreshing step of EVR embedding uses by default.

Modular exponentiation goes through gmpy2; everything handed back to the
caller is a plain Python ``int``.
"""
from __future__ import annotations

import hashlib
import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import gmpy2

from .errors import (
    BadRandomness,
    FormatError,
    MalformedCiphertext,
    NonDivisibleInput,
    PlaintextOutOfRange,
    PrimeGenerationFailure,
)

RECORD_VERSION = 1

_SMALL_PRIMES = [
    p for p in range(3, 2000) if all(p % d for d in range(2, int(p ** 0.5) + 1))
]

# 40 Miller-Rabin rounds bound the error by 4^-40 = 2^-80
MR_ROUNDS = 40


def _powmod(base: int, exp: int, mod: int) -> int:
    return int(gmpy2.powmod(base, exp, mod))


def _count(counter: Optional[Counter], key: str, n: int = 1) -> None:
    if counter is not None:
        counter[key] += n


@dataclass(frozen=True)
class PaillierPublicKey:
    N: int
    g: int

    @property
    def nsquare(self) -> int:
        return self.N * self.N

    @property
    def ciphertext_bytes(self) -> int:
        """Width of the canonical fixed-size byte encoding of a ciphertext."""
        return (self.nsquare.bit_length() + 7) // 8

    def validate(self, c: "PaillierCiphertext") -> None:
        if not 1 <= c.value < self.nsquare or math.gcd(c.value, self.nsquare) != 1:
            raise MalformedCiphertext(f"{c.value:#x} is not a unit modulo N^2")

    def to_record(self) -> dict:
        return {"kind": "paillier-pk", "version": RECORD_VERSION,
                "N": format(self.N, "x"), "g": format(self.g, "x")}

    @classmethod
    def from_record(cls, rec: dict) -> "PaillierPublicKey":
        if rec.get("kind") != "paillier-pk":
            raise FormatError(f"expected a paillier-pk record, got {rec.get('kind')!r}")
        return cls(N=_hex(rec, "N"), g=_hex(rec, "g"))


@dataclass(frozen=True)
class PaillierSecretKey:
    p: int
    q: int
    lam: int
    mu: int

    def to_record(self) -> dict:
        return {"kind": "paillier-sk", "version": RECORD_VERSION,
                "p": format(self.p, "x"), "q": format(self.q, "x"),
                "lambda": format(self.lam, "x"), "mu": format(self.mu, "x")}

    @classmethod
    def from_record(cls, rec: dict) -> "PaillierSecretKey":
        if rec.get("kind") != "paillier-sk":
            raise FormatError(f"expected a paillier-sk record, got {rec.get('kind')!r}")
        return cls(p=_hex(rec, "p"), q=_hex(rec, "q"),
                   lam=_hex(rec, "lambda"), mu=_hex(rec, "mu"))


@dataclass(frozen=True)
class PaillierCiphertext:
    value: int

    @property
    def lsb(self) -> int:
        return self.value & 1

    def bit(self, position: int) -> int:
        return (self.value >> position) & 1

    def to_bytes(self, pk: PaillierPublicKey) -> bytes:
        return self.value.to_bytes(pk.ciphertext_bytes, "big")

    def to_record(self) -> dict:
        return {"c": format(self.value, "x")}

    @classmethod
    def from_record(cls, rec: dict) -> "PaillierCiphertext":
        return cls(_hex(rec, "c"))


def _hex(rec: dict, field: str) -> int:
    try:
        return int(rec[field], 16)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"field {field!r} missing or not hexadecimal") from exc


# -- primes -----------------------------------------------------------------

def is_probable_prime(n: int, rng: random.Random, rounds: int = MR_ROUNDS) -> bool:
    """Trial division by small primes, then Miller-Rabin with random bases."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n == 2:
        return True
    if n % 2 == 0:
        return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = _powmod(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: random.Random, max_draws: Optional[int] = None) -> int:
    """Draw a prime with exactly ``bits`` bits."""
    if bits < 3:
        raise ValueError("prime_bits must be at least 3")
    if max_draws is None:
        max_draws = 100 * bits
    top = 1 << (bits - 1)
    for _ in range(max_draws):
        candidate = rng.getrandbits(bits) | top | 1
        if is_probable_prime(candidate, rng):
            return candidate
    raise PrimeGenerationFailure(f"no {bits}-bit prime after {max_draws} draws")


# -- keys -------------------------------------------------------------------

def l_function(x: int, N: int) -> int:
    """``L(x) = (x - 1) / N``, exact."""
    q, rem = divmod(x - 1, N)
    if rem:
        raise NonDivisibleInput(f"N={N} does not divide x-1 for x={x}")
    return q


def keypair_from_primes(p: int, q: int, g: Optional[int] = None):
    """Build a keypair from known primes; ``g`` defaults to ``N + 1``."""
    if p == q:
        raise ValueError("p and q must be distinct")
    N = p * q
    if g is None:
        g = N + 1
    nsq = N * N
    lam = math.lcm(p - 1, q - 1)
    if math.gcd(g, nsq) != 1:
        raise ValueError("g must be a unit modulo N^2")
    try:
        lg = l_function(_powmod(g, lam, nsq), N)
    except NonDivisibleInput as exc:
        raise ValueError("g^lambda is not 1 mod N; p or q is not prime") from exc
    if math.gcd(lg, N) != 1:
        raise ValueError("gcd(L(g^lambda mod N^2), N) != 1 for this g")
    mu = pow(lg, -1, N)
    return PaillierPublicKey(N, g), PaillierSecretKey(p, q, lam, mu)


def paillier_keygen(prime_bits: int = 1024, rng: Optional[random.Random] = None,
                    g: Optional[int] = None, max_attempts: int = 64):
    """Generate ``(pk, sk)`` with two distinct ``prime_bits``-bit primes.

    Prime pairs are redrawn when ``p == q``, when ``N`` comes out one bit
    short, or when the ``g`` condition fails
    (for ``g = N + 1`` that happens iff ``gcd(N, (p-1)(q-1)) != 1``).
    """
    if prime_bits < 3:
        raise ValueError("prime_bits must be at least 3")
    rng = rng if rng is not None else random.Random()
    for _ in range(max_attempts):
        p = random_prime(prime_bits, rng)
        q = random_prime(prime_bits, rng)
        # N must have exactly 2 * prime_bits bits
        if p == q or (p * q).bit_length() != 2 * prime_bits:
            continue
        try:
            return keypair_from_primes(p, q, g)
        except ValueError:
            continue
    raise PrimeGenerationFailure(
        f"no valid {prime_bits}-bit prime pair after {max_attempts} attempts")


def check_keypair(pk: PaillierPublicKey, sk: PaillierSecretKey, rng=None) -> None:
    """Assert every key invariant; raises ``AssertionError`` on violation."""
    rng = rng if rng is not None else random.Random(0)
    assert sk.p != sk.q
    assert is_probable_prime(sk.p, rng) and is_probable_prime(sk.q, rng)
    assert pk.N == sk.p * sk.q and pk.N >= 15
    assert sk.lam == math.lcm(sk.p - 1, sk.q - 1)
    lg = l_function(_powmod(pk.g, sk.lam, pk.nsquare), pk.N)
    assert math.gcd(lg, pk.N) == 1
    assert sk.mu * lg % pk.N == 1


# -- encryption -------------------------------------------------------------

def _check_randomness(pk: PaillierPublicKey, r: int) -> None:
    if not 1 <= r < pk.N or math.gcd(r, pk.N) != 1:
        raise BadRandomness(f"r={r} is not a unit modulo N")


def random_unit(pk: PaillierPublicKey, rng: random.Random) -> int:
    """Uniform draw from Z_N^*."""
    while True:
        r = rng.randrange(1, pk.N)
        if math.gcd(r, pk.N) == 1:
            return r


def paillier_encrypt(pk: PaillierPublicKey, m: int, r: int,
                     counter: Optional[Counter] = None) -> PaillierCiphertext:
    if not 0 <= m < pk.N:
        raise PlaintextOutOfRange(f"plaintext {m} outside [0, {pk.N - 1}]")
    _check_randomness(pk, r)
    nsq = pk.nsquare
    if pk.g == pk.N + 1:
        gm = (1 + m * pk.N) % nsq  # binomial shortcut, identical value
    else:
        gm = _powmod(pk.g, m, nsq)
        _count(counter, "modexp")
    _count(counter, "modexp")
    _count(counter, "encrypt")
    return PaillierCiphertext(gm * _powmod(r, pk.N, nsq) % nsq)


def encrypt_random(pk: PaillierPublicKey, m: int, rng: random.Random,
                   counter: Optional[Counter] = None):
    """Encrypt with fresh randomness; returns ``(ciphertext, r)``."""
    r = random_unit(pk, rng)
    return paillier_encrypt(pk, m, r, counter), r


def paillier_rerandomize(pk: PaillierPublicKey, c: PaillierCiphertext, s: int,
                         counter: Optional[Counter] = None) -> PaillierCiphertext:
    """``c * s^N mod N^2``: same plaintext, randomness multiplied by ``s``."""
    _check_randomness(pk, s)
    _count(counter, "modexp")
    _count(counter, "rerandomize")
    nsq = pk.nsquare
    return PaillierCiphertext(c.value * _powmod(s, pk.N, nsq) % nsq)


def paillier_decrypt(sk: PaillierSecretKey, pk: PaillierPublicKey,
                     c: PaillierCiphertext, counter: Optional[Counter] = None) -> int:
    pk.validate(c)
    _count(counter, "modexp")
    _count(counter, "decrypt")
    try:
        u = l_function(_powmod(c.value, sk.lam, pk.nsquare), pk.N)
    except NonDivisibleInput as exc:
        raise MalformedCiphertext(str(exc)) from exc
    return u * sk.mu % pk.N


def decryption_trace(sk: PaillierSecretKey, pk: PaillierPublicKey,
                     c: PaillierCiphertext,
                     counter: Optional[Counter] = None) -> tuple[int, int]:
    """Process variables exposed while decrypting ``c``.

    Returns ``(L(c^lambda mod N^2), r)`` where ``r`` is the encryption
    randomness recovered with the factorisation: ``r = (c g^-m mod N)^(N^-1 mod
    lambda) mod N``.  ``counter`` records the decryption itself, not the
    randomness recovery, which is analysis on top of it.
    """
    pk.validate(c)
    _count(counter, "modexp")
    _count(counter, "decrypt")
    u = l_function(_powmod(c.value, sk.lam, pk.nsquare), pk.N)
    m = u * sk.mu % pk.N
    rn = c.value * pow(_powmod(pk.g, m, pk.N), -1, pk.N) % pk.N
    r = _powmod(rn, pow(pk.N, -1, sk.lam), pk.N)
    return u, r


def homomorphic_add(pk: PaillierPublicKey, c1: PaillierCiphertext,
                    c2: PaillierCiphertext) -> PaillierCiphertext:
    return PaillierCiphertext(c1.value * c2.value % pk.nsquare)


def fingerprint(pk: PaillierPublicKey) -> str:
    blob = json.dumps(pk.to_record(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
