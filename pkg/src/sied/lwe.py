"""Toy symmetric LWE encryption with noise-parity embedding.

``b = <a, s> + e + floor(q/2) * m  (mod q)`` with ``a`` uniform and ``e`` a
rounded Gaussian.  A payload bit is hidden in the parity of ``e``: the
sender redraws the noise until ``e mod 2`` equals the bit.  Decryption is
untouched, but the noise recovered while decrypting only ever takes one
parity class, which gives its histogram a comb of peaks.

This is a small stand-in for quantization-redundancy embedding in lattice
ciphertexts, not a reproduction of any particular published algorithm, and
the parameters carry no security claim.

Scalar functions mirror the textbook operations; the ``*_many`` variants
work on whole batches with numpy and are what the attack harness uses.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import FormatError, RetryLimitExceeded

MAX_NOISE_DRAWS = 64


@dataclass(frozen=True)
class LweParams:
    n: int = 32
    q: int = 12289
    sigma: float = 3.2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.q % 2 == 0 or self.q < 3:
            raise ValueError("q must be an odd modulus >= 3")
        if not self.sigma > 0 or not self.q > 8 * self.sigma:
            raise ValueError("need 0 < sigma and q > 8 * sigma")

    @property
    def half(self) -> int:
        return self.q // 2

    @property
    def residue_bytes(self) -> int:
        return (self.q.bit_length() + 7) // 8

    @property
    def ciphertext_bytes(self) -> int:
        return (self.n + 1) * self.residue_bytes

    def to_record(self) -> dict:
        return {"n": self.n, "q": self.q, "sigma": self.sigma}

    @classmethod
    def from_record(cls, rec: dict) -> "LweParams":
        try:
            return cls(int(rec["n"]), int(rec["q"]), float(rec.get("sigma", 3.2)))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad LWE params record: {rec!r}") from exc


@dataclass(frozen=True)
class LweSecretKey:
    s: tuple[int, ...]
    params: LweParams

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.s, dtype=np.int64)

    def to_record(self) -> dict:
        return {"kind": "lwe-sk", "version": 1, "params": self.params.to_record(),
                "s": list(self.s)}

    @classmethod
    def from_record(cls, rec: dict) -> "LweSecretKey":
        if rec.get("kind") != "lwe-sk":
            raise FormatError(f"expected an lwe-sk record, got {rec.get('kind')!r}")
        params = LweParams.from_record(rec.get("params", {}))
        s = tuple(int(v) for v in rec.get("s", []))
        if len(s) != params.n or any(not 0 <= v < params.q for v in s):
            raise FormatError("secret vector does not match params")
        return cls(s, params)


@dataclass(frozen=True)
class LweCiphertext:
    a: tuple[int, ...]
    b: int

    def to_record(self, params: LweParams) -> dict:
        return {"a": list(self.a), "b": int(self.b),
                "params": {"n": params.n, "q": params.q}}

    @classmethod
    def from_record(cls, rec: dict) -> "LweCiphertext":
        try:
            return cls(tuple(int(v) for v in rec["a"]), int(rec["b"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("bad LWE ciphertext record") from exc


@dataclass(frozen=True)
class NoiseSample:
    e: int
    draws: int = 1


@dataclass
class LweBatch:
    """Row ``i`` of ``A`` and ``b[i]`` form one ciphertext."""

    A: np.ndarray
    b: np.ndarray

    def __len__(self):
        return len(self.b)

    def ciphertexts(self) -> list[LweCiphertext]:
        return [LweCiphertext(tuple(int(v) for v in row), int(bi))
                for row, bi in zip(self.A, self.b)]

    @classmethod
    def from_ciphertexts(cls, cts, params: LweParams) -> "LweBatch":
        if not cts:
            return cls(np.zeros((0, params.n), np.int64), np.zeros(0, np.int64))
        return cls(np.array([c.a for c in cts], dtype=np.int64),
                   np.array([c.b for c in cts], dtype=np.int64))


def centered(v, q: int):
    """Representative of ``v mod q`` in ``(-q/2, q/2]``."""
    v = np.mod(v, q)
    return np.where(v > q // 2, v - q, v)


def round_half_down(num, den):
    """``round(num / den)`` with exact ties going toward zero (num, den >= 0)."""
    return -((den - 2 * np.asarray(num)) // (2 * den))


def sample_noise(params: LweParams, rng: np.random.Generator, size=None):
    return np.rint(rng.normal(0.0, params.sigma, size=size)).astype(np.int64)


def lwe_keygen(params: LweParams = LweParams(),
               rng: Optional[np.random.Generator] = None) -> LweSecretKey:
    rng = rng if rng is not None else np.random.default_rng()
    s = rng.integers(0, params.q, size=params.n)
    return LweSecretKey(tuple(int(v) for v in s), params)


def _assemble(sk: LweSecretKey, A: np.ndarray, m: np.ndarray, e: np.ndarray) -> np.ndarray:
    p = sk.params
    return (A @ sk.vector + e + p.half * m) % p.q


def lwe_encrypt_many(sk: LweSecretKey, m, rng: np.random.Generator):
    """Encrypt an array of bits; returns ``(LweBatch, noise array)``."""
    p = sk.params
    m = np.asarray(m, dtype=np.int64)
    A = rng.integers(0, p.q, size=(len(m), p.n))
    e = sample_noise(p, rng, size=len(m))
    return LweBatch(A, _assemble(sk, A, m, e)), e


def lwe_embed_many(sk: LweSecretKey, m, payload, rng: np.random.Generator,
                   max_draws: int = MAX_NOISE_DRAWS):
    """Encrypt bits ``m`` with noise parity forced to ``payload``.

    Returns ``(LweBatch, noise, draws)`` where ``draws[i]`` counts the noise
    samples drawn for ciphertext ``i`` (1 when the first draw matched).
    """
    p = sk.params
    m = np.asarray(m, dtype=np.int64)
    payload = np.asarray(payload, dtype=np.int64)
    if m.shape != payload.shape:
        raise ValueError("m and payload must have the same length")
    A = rng.integers(0, p.q, size=(len(m), p.n))
    e = sample_noise(p, rng, size=len(m))
    draws = np.ones(len(m), dtype=np.int64)
    todo = np.flatnonzero(e % 2 != payload)
    while todo.size:
        if draws[todo].max() >= max_draws:
            bad = int(todo[np.argmax(draws[todo])])
            raise RetryLimitExceeded(f"noise parity not matched after {max_draws} draws "
                                     f"at ciphertext {bad}", bad)
        e[todo] = sample_noise(p, rng, size=todo.size)
        draws[todo] += 1
        todo = todo[e[todo] % 2 != payload[todo]]
    return LweBatch(A, _assemble(sk, A, m, e)), e, draws


def _phase(sk: LweSecretKey, batch: LweBatch) -> np.ndarray:
    return (batch.b - batch.A @ sk.vector) % sk.params.q


def lwe_decrypt_many(sk: LweSecretKey, batch: LweBatch) -> np.ndarray:
    q = sk.params.q
    return round_half_down(2 * _phase(sk, batch), q) % 2


def lwe_noise_many(sk: LweSecretKey, batch: LweBatch) -> np.ndarray:
    """Noise recovered during decryption: ``centered(b - <a,s> - floor(q/2) m)``."""
    p = sk.params
    m = lwe_decrypt_many(sk, batch)
    return centered(_phase(sk, batch) - p.half * m, p.q)


def lwe_extract_many(sk: LweSecretKey, batch: LweBatch) -> np.ndarray:
    return lwe_noise_many(sk, batch) % 2


# -- scalar forms -----------------------------------------------------------

def _single(ct: LweCiphertext) -> LweBatch:
    return LweBatch(np.asarray([ct.a], dtype=np.int64), np.asarray([ct.b], dtype=np.int64))


def lwe_encrypt(sk: LweSecretKey, m: int, rng: np.random.Generator,
                noise: Optional[int] = None):
    """Encrypt one bit; ``noise`` pins ``e`` (e.g. 0) instead of sampling it."""
    if m not in (0, 1):
        raise ValueError("m must be a bit")
    p = sk.params
    a = rng.integers(0, p.q, size=(1, p.n))
    e = sample_noise(p, rng, size=1) if noise is None else np.array([noise], np.int64)
    b = _assemble(sk, a, np.array([m]), e)
    return LweCiphertext(tuple(int(v) for v in a[0]), int(b[0])), NoiseSample(int(e[0]))


def lwe_embed_bit(sk: LweSecretKey, m: int, payload: int, rng: np.random.Generator,
                  max_draws: int = MAX_NOISE_DRAWS):
    if m not in (0, 1) or payload not in (0, 1):
        raise ValueError("m and payload must be bits")
    batch, e, draws = lwe_embed_many(sk, [m], [payload], rng, max_draws)
    return batch.ciphertexts()[0], NoiseSample(int(e[0]), int(draws[0]))


def lwe_decrypt(sk: LweSecretKey, ct: LweCiphertext) -> int:
    return int(lwe_decrypt_many(sk, _single(ct))[0])


def lwe_extract_bit(sk: LweSecretKey, ct: LweCiphertext) -> int:
    return int(lwe_extract_many(sk, _single(ct))[0])


def lwe_noise(sk: LweSecretKey, ct: LweCiphertext) -> int:
    return int(lwe_noise_many(sk, _single(ct))[0])
