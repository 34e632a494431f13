"""Registered schemes behind one common interface.

Every scheme knows how to generate keys, produce honest covers, embed,
extract, decrypt, and expose the data the attack harness inspects: the
serialized size of a bundle, ciphertext samples for uniformity testing,
decryption-side process variables, and how many encryption invocations each
stego unit cost.

Bundles are scheme specific: a list of :class:`PaillierCiphertext`, an
:class:`ExpansionStego`, or an :class:`LweBatch`.
"""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import baselines as bl
from .errors import KeyRoleMismatch, LengthMismatch
from .evr import EvrConfig, evr_embed_covers, evr_embed_message, evr_extract_message
from .lwe import (
    LweBatch,
    LweParams,
    LweSecretKey,
    lwe_decrypt_many,
    lwe_embed_many,
    lwe_encrypt_many,
    lwe_extract_many,
    lwe_keygen,
    lwe_noise_many,
)
from .paillier import (
    PaillierCiphertext,
    PaillierPublicKey,
    PaillierSecretKey,
    decryption_trace,
    encrypt_random,
    paillier_decrypt,
    paillier_keygen,
)
from .taxonomy import KeyRole, SchemeDescriptor, SecurityLevel, SiedMode

# leading bytes dropped before byte-uniformity tests; their distribution is
# shaped by the magnitude of N^2, not by the scheme
SKIP_HIGH_BYTES = 4


@dataclass
class SchemeKeys:
    encryption: Any
    decryption: Any


@dataclass
class Batch:
    plaintexts: Any
    covers: Any
    stegos: Any
    bits: list
    trace: dict = field(default_factory=dict)


def flat_ints(values) -> list[int]:
    """Flatten plaintexts to Python ints without a lossy numpy round trip."""
    if isinstance(values, np.ndarray):
        values = values.reshape(-1)
    return [int(v) for v in values]


def key_roles(key) -> set:
    if key is None:
        return {KeyRole.NONE}
    if isinstance(key, PaillierPublicKey):
        return {KeyRole.ENCRYPTION}
    if (isinstance(key, tuple) and len(key) == 2
            and isinstance(key[0], PaillierPublicKey)
            and isinstance(key[1], PaillierSecretKey)):
        return {KeyRole.ENCRYPTION, KeyRole.DECRYPTION}
    if isinstance(key, LweSecretKey):
        # symmetric: the one secret both encrypts and decrypts
        return {KeyRole.ENCRYPTION, KeyRole.DECRYPTION}
    return set()


def require_role(key, role: KeyRole, what: str):
    if role is KeyRole.NONE:
        return
    if role not in key_roles(key):
        raise KeyRoleMismatch(f"{what} needs the {role.value} key, "
                              f"got {type(key).__name__}")


def _pk_of(key) -> PaillierPublicKey:
    return key[0] if isinstance(key, tuple) else key


class Scheme:
    descriptor: SchemeDescriptor
    family = "paillier"
    psnr_max = 255.0
    psnr_block: Optional[int] = None

    @property
    def name(self) -> str:
        return self.descriptor.name

    # -- keys and covers ---------------------------------------------------
    def generate_keys(self, prime_bits: int, lwe_params: LweParams,
                      rng: random.Random, nprng: np.random.Generator) -> SchemeKeys:
        pk, sk = paillier_keygen(prime_bits, rng)
        return SchemeKeys(pk, (pk, sk))

    def sample_plaintexts(self, keys: SchemeKeys, n: int, rng: random.Random,
                          nprng: np.random.Generator):
        N = _pk_of(keys.encryption).N
        return [rng.randrange(N) for _ in range(n)]

    def encrypt(self, keys: SchemeKeys, plaintexts, rng: random.Random,
                nprng: np.random.Generator, counter: Optional[Counter] = None):
        require_role(keys.encryption, KeyRole.ENCRYPTION, "encryption")
        pk = _pk_of(keys.encryption)
        return [encrypt_random(pk, int(m), rng, counter)[0] for m in plaintexts]

    def capacity(self, n_covers: int) -> int:
        return n_covers

    # -- embedding ---------------------------------------------------------
    def embed(self, embed_key, covers, plaintexts, bits, rng: random.Random,
              nprng: np.random.Generator, **options):
        raise NotImplementedError

    def extract(self, extract_key, stego, nbits=None) -> list[int]:
        raise NotImplementedError

    # -- receiver / harness views -----------------------------------------
    def decrypt(self, keys: SchemeKeys, bundle, counter: Optional[Counter] = None):
        require_role(keys.decryption, KeyRole.DECRYPTION, "decryption")
        pk, sk = keys.decryption
        values = [paillier_decrypt(sk, pk, c, counter) for c in self.records(bundle)]
        return self.receiver_view(bundle, values)

    def records(self, bundle) -> list:
        return list(bundle)

    def serialized_size(self, keys: SchemeKeys, bundle) -> int:
        return len(self.records(bundle)) * _pk_of(keys.encryption).ciphertext_bytes

    def ciphertext_samples(self, keys: SchemeKeys, bundle):
        """``(samples, bins, domain)`` for a chi-square uniformity test."""
        pk = _pk_of(keys.encryption)
        width = pk.ciphertext_bytes
        blob = b"".join(c.value.to_bytes(width, "big") for c in self.records(bundle))
        arr = np.frombuffer(blob, dtype=np.uint8).reshape(-1, width)
        return arr[:, SKIP_HIGH_BYTES:].reshape(-1), 256, 256

    def decrypt_and_trace(self, keys: SchemeKeys, bundle, counter: Optional[Counter] = None):
        """Decrypt and collect the process variables in the same pass.

        Returns ``(plaintexts, traces)``; ``counter`` sees exactly the
        operations of :meth:`decrypt`.
        """
        require_role(keys.decryption, KeyRole.DECRYPTION, "decryption")
        pk, sk = keys.decryption
        values, us, rs = [], [], []
        for c in self.records(bundle):
            u, r = decryption_trace(sk, pk, c, counter)
            values.append(u * sk.mu % pk.N)
            us.append(u / pk.N)
            rs.append(r / pk.N)
        traces = {"paillier.L": np.array(us), "paillier.r": np.array(rs)}
        return self.receiver_view(bundle, values), traces

    def receiver_view(self, bundle, values: list) -> list:
        return values

    def decryption_traces(self, keys: SchemeKeys, bundle) -> dict:
        return self.decrypt_and_trace(keys, bundle)[1]

    # -- harness batches ---------------------------------------------------
    def payload(self, n_bits: int, kind: str, nprng: np.random.Generator) -> list[int]:
        if kind == "zeros":
            return [0] * n_bits
        return nprng.integers(0, 2, size=n_bits).tolist()

    def make_batch(self, keys: SchemeKeys, n: int, rng: random.Random,
                   nprng: np.random.Generator, payload: str = "random") -> Batch:
        plaintexts = self.sample_plaintexts(keys, n, rng, nprng)
        covers = self.encrypt(keys, plaintexts, rng, nprng)
        bits = self.payload(self.capacity(len(covers)), payload, nprng)
        stegos, trace = self.embed(keys.encryption, covers, plaintexts, bits, rng, nprng)
        return Batch(plaintexts, covers, stegos, bits, trace)


class EvrScheme(Scheme):
    descriptor = SchemeDescriptor(
        "evr", SiedMode.EMC, KeyRole.ENCRYPTION, KeyRole.NONE, SecurityLevel.CCA,
        summary="Paillier randomness refreshed until the ciphertext LSB is the message bit")

    def __init__(self, config: EvrConfig = EvrConfig()):
        self.config = config

    def capacity(self, n_covers: int) -> int:
        return n_covers * self.config.bits_per_symbol

    def embed(self, embed_key, covers, plaintexts, bits, rng, nprng, modulus=None,
              counter=None, **options):
        """Embed into the leading covers; any covers past the payload pass through."""
        k = self.config.bits_per_symbol
        used = _used_units(len(bits), k, len(covers))
        head = covers[:used]
        if embed_key is None:
            # interception path: refresh the given covers using only N
            if modulus is None:
                raise KeyRoleMismatch("keyless EVR needs the public modulus")
            cfg = EvrConfig(self.config.positions, self.config.max_retries, "rerandomize")
            stegos, trace = evr_embed_covers(modulus, head, bits, cfg, rng, counter)
        else:
            require_role(embed_key, KeyRole.ENCRYPTION, "evr embedding")
            if isinstance(embed_key, LweSecretKey):
                raise KeyRoleMismatch("evr embeds with a Paillier key")
            pk = _pk_of(embed_key)
            if self.config.refresh == "rerandomize":
                # the covers are already fresh encryptions: refresh them in place
                stegos, trace = evr_embed_covers(pk.N, head, bits, self.config, rng, counter)
            else:
                stegos, trace = evr_embed_message(pk, plaintexts[:used], bits, self.config,
                                                  rng, counter)
        rest = list(covers[used:])
        return stegos + rest, {"evr.refreshes": list(trace.counts),
                               "invocations": trace.invocations + [1] * len(rest)}

    def extract(self, extract_key, stego, nbits=None):
        bits = evr_extract_message(stego, self.config)
        return bits if nbits is None else bits[:nbits]


def _used_units(nbits: int, per_unit: int, available: int) -> int:
    if nbits % per_unit:
        raise LengthMismatch(f"{nbits} bits is not a multiple of {per_unit}")
    used = nbits // per_unit
    if used > available:
        raise LengthMismatch(f"{nbits} bits need {used} covers, only {available} given")
    return used


class PlainPaillierScheme(Scheme):
    """Null scheme: covers go out untouched."""

    descriptor = SchemeDescriptor(
        "plain-paillier", SiedMode.AF, KeyRole.NONE, KeyRole.NONE, SecurityLevel.ACCA,
        carries_payload=False, summary="plain Paillier encryption, nothing embedded")

    def capacity(self, n_covers: int) -> int:
        return 0

    def embed(self, embed_key, covers, plaintexts, bits, rng, nprng, **options):
        if bits:
            raise LengthMismatch("the null scheme carries no payload")
        return list(covers), {"invocations": [1] * len(covers)}

    def extract(self, extract_key, stego, nbits=None):
        return []


class ExpansionLsbScheme(Scheme):
    descriptor = SchemeDescriptor(
        "expansion-lsb", SiedMode.AC, KeyRole.ENCRYPTION, KeyRole.DECRYPTION,
        SecurityLevel.NONE, standard_ops=False,
        summary="payload bits encrypted into extra ciphertexts appended to the cover")

    def embed(self, embed_key, covers, plaintexts, bits, rng, nprng, counter=None,
              **options):
        require_role(embed_key, KeyRole.ENCRYPTION, "expansion-lsb embedding")
        stego = bl.expansion_embed(_pk_of(embed_key), covers, bits, rng, counter)
        return stego, {"invocations": [1] * len(stego.records)}

    def extract(self, extract_key, stego, nbits=None):
        require_role(extract_key, KeyRole.DECRYPTION, "expansion-lsb extraction")
        pk, sk = extract_key
        return bl.expansion_extract(sk, pk, stego)

    def records(self, bundle):
        if isinstance(bundle, bl.ExpansionStego):
            return bundle.records
        return list(bundle)

    def receiver_view(self, bundle, values):
        # the receiver decrypts every record it is sent; the cover plaintexts
        # are the leading ones
        if isinstance(bundle, bl.ExpansionStego):
            return values[:len(bundle.original)]
        return values


class MarkedDeScheme(Scheme):
    descriptor = SchemeDescriptor(
        "marked-de", SiedMode.AC, KeyRole.ENCRYPTION, KeyRole.DECRYPTION,
        SecurityLevel.SCOA, standard_ops=False,
        summary="difference expansion on the plaintext samples, then encryption")

    def __init__(self, image_shape=bl.IMAGE_SHAPE, rate: float = bl.DEFAULT_RATE):
        self.image_shape = tuple(image_shape)
        self.rate = rate

    @property
    def psnr_block(self) -> int:
        return math.prod(self.image_shape)

    def sample_plaintexts(self, keys, n, rng, nprng):
        corpus = bl.gradient_corpus(self.image_shape)
        # never fewer images than the corpus holds
        count = max(len(corpus), -(-n // self.psnr_block))
        return np.concatenate([corpus[i % len(corpus)].reshape(-1)
                               for i in range(count)]).astype(np.int64).tolist()

    def capacity(self, n_covers: int) -> int:
        blocks = n_covers // self.psnr_block
        return blocks * int(self.psnr_block * self.rate)

    def embed(self, embed_key, covers, plaintexts, bits, rng, nprng, counter=None,
              **options):
        require_role(embed_key, KeyRole.ENCRYPTION, "marked-de embedding")
        if plaintexts is None:
            raise ValueError("marked-de marks the plaintext samples; pass plaintexts")
        pk = _pk_of(embed_key)
        samples = np.asarray(plaintexts, dtype=np.int64)
        block = self.psnr_block
        if samples.size % block:
            raise LengthMismatch(f"{samples.size} samples is not a whole number of "
                                 f"{self.image_shape} images")
        n_img = samples.size // block
        # ceil split: every image but possibly the last carries ``per`` bits
        per = -(-len(bits) // n_img) if n_img else 0
        stegos = []
        for i in range(n_img):
            img = samples[i * block:(i + 1) * block]
            stegos.extend(bl.marked_de_embed(pk, img, bits[i * per:(i + 1) * per],
                                             rng, counter))
        return stegos, {"invocations": [1] * len(stegos)}

    def extract(self, extract_key, stego, nbits=None):
        require_role(extract_key, KeyRole.DECRYPTION, "marked-de extraction")
        pk, sk = extract_key
        block = self.psnr_block
        bits = []
        for i in range(0, len(stego), block):
            _, b = bl.marked_de_extract(sk, pk, stego[i:i + block])
            bits.extend(b)
        return bits


class _LweBase(Scheme):
    family = "lwe"
    psnr_max = 1.0

    def generate_keys(self, prime_bits, lwe_params, rng, nprng):
        sk = lwe_keygen(lwe_params, nprng)
        return SchemeKeys(sk, sk)

    def sample_plaintexts(self, keys, n, rng, nprng):
        return nprng.integers(0, 2, size=n)

    def encrypt(self, keys, plaintexts, rng, nprng, counter=None):
        require_role(keys.encryption, KeyRole.ENCRYPTION, "encryption")
        batch, _ = lwe_encrypt_many(keys.encryption, plaintexts, nprng)
        if counter is not None:
            counter["encrypt"] += len(batch)
        return batch

    def decrypt(self, keys, bundle, counter=None):
        require_role(keys.decryption, KeyRole.DECRYPTION, "decryption")
        if counter is not None:
            counter["inner_product"] += len(bundle)
        return lwe_decrypt_many(keys.decryption, bundle).tolist()

    def records(self, bundle):
        return bundle.ciphertexts()

    def serialized_size(self, keys, bundle):
        return len(bundle) * keys.encryption.params.ciphertext_bytes

    def ciphertext_samples(self, keys, bundle):
        q = keys.encryption.params.q
        return np.concatenate([bundle.A.reshape(-1), bundle.b]), 256, q

    def decryption_traces(self, keys, bundle):
        return {"lwe.noise": lwe_noise_many(keys.decryption, bundle)}

    def decrypt_and_trace(self, keys, bundle, counter=None):
        return self.decrypt(keys, bundle, counter), self.decryption_traces(keys, bundle)


class LweToyScheme(_LweBase):
    descriptor = SchemeDescriptor(
        "lwe-toy", SiedMode.AC, KeyRole.ENCRYPTION, KeyRole.DECRYPTION, SecurityLevel.KCA,
        standard_ops=False,
        summary="LWE noise redrawn until its parity is the payload bit")

    def embed(self, embed_key, covers, plaintexts, bits, rng, nprng, **options):
        require_role(embed_key, KeyRole.ENCRYPTION, "lwe-toy embedding")
        if not isinstance(embed_key, LweSecretKey):
            raise KeyRoleMismatch("lwe-toy embeds with its secret key")
        if plaintexts is None:
            raise ValueError("lwe-toy re-encrypts the plaintext bits; pass plaintexts")
        used = _used_units(len(bits), 1, len(plaintexts))
        batch, noise, draws = lwe_embed_many(embed_key, np.asarray(plaintexts)[:used], bits,
                                             nprng)
        rest = len(plaintexts) - used
        if rest:
            batch = LweBatch(np.vstack([batch.A, covers.A[used:]]),
                             np.concatenate([batch.b, covers.b[used:]]))
        return batch, {"lwe.noise": noise.tolist(),
                       "invocations": draws.tolist() + [1] * rest}

    def extract(self, extract_key, stego, nbits=None):
        require_role(extract_key, KeyRole.DECRYPTION, "lwe-toy extraction")
        if not isinstance(extract_key, LweSecretKey):
            raise KeyRoleMismatch("lwe-toy extracts with its secret key")
        bits = lwe_extract_many(extract_key, stego).tolist()
        return bits if nbits is None else bits[:nbits]


class PlainLweScheme(_LweBase):
    descriptor = SchemeDescriptor(
        "plain-lwe", SiedMode.AF, KeyRole.NONE, KeyRole.NONE, SecurityLevel.ACCA,
        carries_payload=False, summary="plain LWE encryption, nothing embedded")

    def capacity(self, n_covers):
        return 0

    def embed(self, embed_key, covers, plaintexts, bits, rng, nprng, **options):
        if len(bits):
            raise LengthMismatch("the null scheme carries no payload")
        return covers, {"invocations": [1] * len(covers)}

    def extract(self, extract_key, stego, nbits=None):
        return []


REGISTRY: dict[str, Scheme] = {
    s.name: s for s in (EvrScheme(), LweToyScheme(), ExpansionLsbScheme(), MarkedDeScheme(),
                        PlainPaillierScheme(), PlainLweScheme())
}
STEGO_SCHEMES = ("expansion-lsb", "marked-de", "lwe-toy", "evr")
NULL_SCHEMES = ("plain-paillier", "plain-lwe")


def get_scheme(scheme) -> Scheme:
    if isinstance(scheme, Scheme):
        return scheme
    name = scheme.name if isinstance(scheme, SchemeDescriptor) else str(scheme)
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown scheme {name!r}; known: {sorted(REGISTRY)}") from None
