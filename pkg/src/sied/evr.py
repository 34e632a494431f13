"""Encryption-variable-refreshing (EVR) embedding over Paillier ciphertexts.

A cover ciphertext carries a bit group in fixed bit positions of its
integer value.  Embedding keeps refreshing the encryption randomness until
those positions hold the wanted bits, so every stego-ciphertext is an
ordinary encryption of the original plaintext.  Extraction just reads the
bits back and needs no key.

Two refresh paths exist:

* ``"rerandomize"`` (default) multiplies the ciphertext by ``s^N``; it needs
  only the modulus, so a sender without the plaintext (or the full key) can
  embed into an intercepted ciphertext.
* ``"reencrypt"`` re-encrypts the plaintext with a fresh ``r``.

Both draw the new randomness uniformly among the values different from the
current one, so the accepted ciphertext is uniform over the ciphertexts of
the plaintext whose sampled bits match.
"""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import gmpy2

from .bits import check_bits
from .errors import LengthMismatch, RetryLimitExceeded
from .paillier import (
    PaillierCiphertext,
    PaillierPublicKey,
    paillier_encrypt,
    random_unit,
)

DEFAULT_MAX_RETRIES = 64
REFRESH_MODES = ("rerandomize", "reencrypt")


@dataclass(frozen=True)
class EvrConfig:
    positions: tuple[int, ...] = (0,)
    max_retries: int = DEFAULT_MAX_RETRIES
    refresh: str = "rerandomize"

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if not self.positions:
            raise ValueError("positions must be non-empty")
        if any(p < 0 for p in self.positions) or any(
                a >= b for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be non-negative and strictly increasing")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")
        if self.refresh not in REFRESH_MODES:
            raise ValueError(f"refresh must be one of {REFRESH_MODES}")

    @property
    def bits_per_symbol(self) -> int:
        return len(self.positions)

    def check_modulus(self, N: int) -> None:
        if self.positions[-1] >= (N * N).bit_length():
            raise ValueError(f"bit position {self.positions[-1]} beyond N^2")

    def header(self) -> dict:
        return {"scheme": "evr", "positions": list(self.positions)}


@dataclass(frozen=True)
class RetryTrace:
    """Refresh counts, one per embedded symbol, in input order."""

    counts: tuple[int, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.counts)

    @property
    def invocations(self) -> list[int]:
        """Encryption-like operations spent per stego-ciphertext."""
        return [c + 1 for c in self.counts]

    @property
    def mean(self) -> float:
        return sum(self.counts) / len(self.counts) if self.counts else 0.0


def read_bits(value: int, positions: Sequence[int]) -> tuple[int, ...]:
    return tuple((value >> p) & 1 for p in positions)


def refresh_count_pmf(j: int, k: int = 1) -> float:
    """P(refresh count == j) when k positions are sampled per ciphertext."""
    p = 2.0 ** -k
    return (1 - p) ** j * p


def _refresh_loop(value: int, target: tuple[int, ...], cfg: EvrConfig, draw,
                  index: Optional[int] = None):
    draws = 1
    while read_bits(value, cfg.positions) != target:
        if draws >= cfg.max_retries:
            raise RetryLimitExceeded(
                f"no match after {cfg.max_retries} draws"
                + ("" if index is None else f" at symbol {index}"), index)
        value = draw()
        draws += 1
    return value, draws - 1


def evr_embed_cover(N: int, cover: PaillierCiphertext, group: Sequence[int],
                    cfg: EvrConfig = EvrConfig(), rng: Optional[random.Random] = None,
                    counter: Optional[Counter] = None, index: Optional[int] = None):
    """Embed ``group`` into an existing ciphertext using only the modulus.

    Returns ``(stego, refresh_count)``; a count of 0 means the cover already
    carried the bits and is returned unchanged.
    """
    if cfg.refresh != "rerandomize":
        raise ValueError("embedding without the plaintext needs refresh='rerandomize'")
    target = tuple(check_bits(group))
    if len(target) != cfg.bits_per_symbol:
        raise LengthMismatch(f"{len(target)} bits for {cfg.bits_per_symbol} positions")
    rng = rng if rng is not None else random.Random()
    nsq = N * N
    mN = gmpy2.mpz(N)
    state = {"value": cover.value}

    def draw():
        # s != 1 keeps the refreshed randomness different from the current one
        while True:
            s = rng.randrange(2, N)
            if math.gcd(s, N) == 1:
                break
        if counter is not None:
            counter["rerandomize"] += 1
        state["value"] = int(state["value"] * gmpy2.powmod(s, mN, nsq) % nsq)
        return state["value"]

    value, count = _refresh_loop(cover.value, target, cfg, draw, index)
    return PaillierCiphertext(value), count


def evr_embed_symbol(pk: PaillierPublicKey, m: int, group: Sequence[int],
                     cfg: EvrConfig = EvrConfig(), rng: Optional[random.Random] = None,
                     counter: Optional[Counter] = None, index: Optional[int] = None):
    """Encrypt ``m`` and refresh until the sampled bits equal ``group``."""
    rng = rng if rng is not None else random.Random()
    r = random_unit(pk, rng)
    cover = paillier_encrypt(pk, m, r, counter)
    if cfg.refresh == "rerandomize":
        return evr_embed_cover(pk.N, cover, group, cfg, rng, counter, index)

    target = tuple(check_bits(group))
    if len(target) != cfg.bits_per_symbol:
        raise LengthMismatch(f"{len(target)} bits for {cfg.bits_per_symbol} positions")
    state = {"r": r}

    def draw():
        while True:
            fresh = random_unit(pk, rng)
            if fresh != state["r"]:
                break
        state["r"] = fresh
        return paillier_encrypt(pk, m, fresh, counter).value

    value, count = _refresh_loop(cover.value, target, cfg, draw, index)
    return PaillierCiphertext(value), count


def evr_embed_bit(pk: PaillierPublicKey, m: int, b: int, cfg: EvrConfig = EvrConfig(),
                  rng: Optional[random.Random] = None, counter: Optional[Counter] = None):
    if cfg.bits_per_symbol != 1:
        raise ValueError("single-bit embedding needs exactly one position")
    return evr_embed_symbol(pk, m, (b,), cfg, rng, counter)


def _groups(bits: Sequence[int], count: int, k: int) -> list[tuple[int, ...]]:
    bits = check_bits(bits)
    if len(bits) != count * k:
        raise LengthMismatch(
            f"{len(bits)} bits cannot fill {count} ciphertexts x {k} positions")
    return [tuple(bits[i * k:(i + 1) * k]) for i in range(count)]


def evr_embed_message(pk: PaillierPublicKey, plaintexts: Sequence[int],
                      bits: Sequence[int], cfg: EvrConfig = EvrConfig(),
                      rng: Optional[random.Random] = None,
                      counter: Optional[Counter] = None):
    """Embed ``bits`` across ``plaintexts``, ``len(cfg.positions)`` per ciphertext.

    The first bits of the message go to the first plaintext; within one
    ciphertext, bit ``j`` of the group lands at ``cfg.positions[j]``.
    Returns ``(stegos, RetryTrace)``.
    """
    cfg.check_modulus(pk.N)
    rng = rng if rng is not None else random.Random()
    groups = _groups(bits, len(plaintexts), cfg.bits_per_symbol)
    stegos, counts = [], []
    for i, (m, group) in enumerate(zip(plaintexts, groups)):
        c, n = evr_embed_symbol(pk, m, group, cfg, rng, counter, index=i)
        stegos.append(c)
        counts.append(n)
    return stegos, RetryTrace(tuple(counts))


def evr_embed_covers(N: int, covers: Sequence[PaillierCiphertext], bits: Sequence[int],
                     cfg: EvrConfig = EvrConfig(), rng: Optional[random.Random] = None,
                     counter: Optional[Counter] = None):
    """Keyless variant of :func:`evr_embed_message` working on intercepted covers."""
    cfg.check_modulus(N)
    rng = rng if rng is not None else random.Random()
    groups = _groups(bits, len(covers), cfg.bits_per_symbol)
    stegos, counts = [], []
    for i, (c, group) in enumerate(zip(covers, groups)):
        s, n = evr_embed_cover(N, c, group, cfg, rng, counter, index=i)
        stegos.append(s)
        counts.append(n)
    return stegos, RetryTrace(tuple(counts))


def evr_extract_message(stegos: Sequence[PaillierCiphertext],
                        cfg: EvrConfig = EvrConfig()) -> list[int]:
    out: list[int] = []
    for c in stegos:
        out.extend(read_bits(c.value, cfg.positions))
    return out
