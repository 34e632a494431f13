"""Deliberately weak reference schemes.

Expansion-LSB appends one fresh ciphertext per payload bit, so the stego
bundle is visibly larger than the cover.

Marked difference expansion (DE) marks 8-bit samples at plaintext level
with classical pair-wise difference expansion and then encrypts the marked
samples.  Decryption therefore yields the *marked* samples: a small but
finite distortion that anyone holding the decryption key can see.

Layout of the DE bit stream, in pair order (pairs are adjacent samples,
row-major)::

    [16-bit V] [V-bit location map] [message bits in the data region]

The first ``16 + V`` pairs carry the header and the map and must all be
expandable.  The map has one bit per pair of the data region (the next
``V`` pairs): 0 = expanded with a message bit, 1 = left untouched.  Used
pairs are the common case, and a 0 costs less distortion on the flat pairs
that dominate smooth images.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bits import check_bits
from .errors import CapacityExceeded, FormatError, NotExpandable, PayloadCorruption
from .paillier import (
    PaillierCiphertext,
    PaillierPublicKey,
    PaillierSecretKey,
    encrypt_random,
    paillier_decrypt,
)

HEADER_BITS = 16
DEFAULT_RATE = 0.01
IMAGE_SHAPE = (64, 64)


# -- expansion LSB ----------------------------------------------------------

@dataclass(frozen=True)
class ExpansionStego:
    original: tuple[PaillierCiphertext, ...]
    appendix: tuple[PaillierCiphertext, ...]

    @property
    def records(self) -> list[PaillierCiphertext]:
        return list(self.original) + list(self.appendix)

    def serialized_size(self, pk: PaillierPublicKey) -> int:
        return len(self.records) * pk.ciphertext_bytes


def expansion_embed(pk: PaillierPublicKey, covers: Sequence[PaillierCiphertext],
                    bits: Sequence[int], rng: Optional[random.Random] = None,
                    counter=None) -> ExpansionStego:
    rng = rng if rng is not None else random.Random()
    appendix = tuple(encrypt_random(pk, b, rng, counter)[0] for b in check_bits(bits))
    return ExpansionStego(tuple(covers), appendix)


def expansion_extract(sk: PaillierSecretKey, pk: PaillierPublicKey,
                      stego: ExpansionStego, counter=None) -> list[int]:
    out = []
    for i, c in enumerate(stego.appendix):
        m = paillier_decrypt(sk, pk, c, counter)
        if m not in (0, 1):
            raise PayloadCorruption(f"appendix record {i} decrypts to {m}, not a bit")
        out.append(m)
    return out


# -- difference expansion on sample pairs ------------------------------------

def _split(x: int, y: int):
    return x - y, (x + y) // 2


def _join(h: int, l: int):
    return l + (h + 1) // 2, l - h // 2


def is_expandable(x: int, y: int, b: Optional[int] = None) -> bool:
    """Whether embedding ``b`` (or either bit, if ``None``) keeps the pair in [0, 255]."""
    bits = (0, 1) if b is None else (b,)
    h, l = _split(x, y)
    for bit in bits:
        xp, yp = _join(2 * h + bit, l)
        if not (0 <= xp <= 255 and 0 <= yp <= 255):
            return False
    return True


def de_embed_pair(pair: tuple[int, int], b: int) -> tuple[int, int]:
    x, y = pair
    if b not in (0, 1):
        raise ValueError("b must be a bit")
    if not (0 <= x <= 255 and 0 <= y <= 255):
        raise ValueError(f"pair {pair} outside the 8-bit range")
    h, l = _split(x, y)
    xp, yp = _join(2 * h + b, l)
    if not (0 <= xp <= 255 and 0 <= yp <= 255):
        raise NotExpandable(f"pair {pair} cannot carry bit {b}")
    return xp, yp


def de_extract_pair(pair: tuple[int, int]):
    """Inverse of :func:`de_embed_pair`: returns ``((x, y), b)``."""
    hp, l = _split(*pair)
    return _join(hp >> 1, l), hp & 1


def _pairs(samples: np.ndarray) -> np.ndarray:
    flat = np.asarray(samples).reshape(-1)
    if flat.size % 2:
        raise ValueError("need an even number of samples to form pairs")
    return flat.reshape(-1, 2).astype(np.int64)


def _plan(pairs: np.ndarray, nbits: int, max_diff: int):
    """Smallest map length V whose data region holds ``nbits`` usable pairs.

    Header and map pairs only need to be expandable; data pairs must also
    satisfy ``-max_diff <= x - y <= max_diff - 1``, the difference range
    where embedding moves each sample by at most ``max_diff``.
    """
    expandable = np.array([is_expandable(int(x), int(y)) for x, y in pairs], dtype=bool)
    h = pairs[:, 0] - pairs[:, 1]
    usable = expandable & (h >= -max_diff) & (h <= max_diff - 1)
    total = len(pairs)
    e_sum = np.concatenate([[0], np.cumsum(expandable)])
    u_sum = np.concatenate([[0], np.cumsum(usable)])
    for V in range(nbits, (total - HEADER_BITS) // 2 + 1):
        start = HEADER_BITS + V
        if u_sum[start + V] - u_sum[start] < nbits:
            continue
        if e_sum[start] != start:
            raise CapacityExceeded("header/location-map region has a non-expandable pair")
        return V, usable
    raise CapacityExceeded(f"cannot fit {nbits} bits into {total} pairs")


def de_mark_samples(samples, bits: Sequence[int], max_diff: int = 1) -> np.ndarray:
    """Embed ``bits`` into 8-bit ``samples`` (any shape); returns marked copy.

    Message bits only go into low-distortion data-region pairs (see
    ``_plan``); the location map records which pairs were used.
    """
    bits = check_bits(bits)
    arr = np.asarray(samples)
    pairs = _pairs(arr)
    nbits = len(bits)
    # an empty payload still writes the header (V = 0) so extraction stays total
    V, ok = _plan(pairs, nbits, max_diff)
    start = HEADER_BITS + V
    data_ok = [bool(ok[start + j]) for j in range(V)]
    location_map = []
    used = 0
    for flag in data_ok:
        take = flag and used < nbits
        location_map.append(0 if take else 1)
        used += take
    header = [(V >> (HEADER_BITS - 1 - i)) & 1 for i in range(HEADER_BITS)]
    stream = header + location_map
    out = pairs.copy()
    for i, b in enumerate(stream):
        out[i] = de_embed_pair(tuple(pairs[i]), b)
    it = iter(bits)
    for j, skipped in enumerate(location_map):
        if not skipped:
            out[start + j] = de_embed_pair(tuple(pairs[start + j]), next(it))
    return out.reshape(arr.shape).astype(arr.dtype)


def de_unmark_samples(marked):
    """Recover ``(original_samples, bits)`` from marked samples."""
    arr = np.asarray(marked)
    pairs = _pairs(arr)
    out = pairs.copy()
    if len(pairs) < HEADER_BITS:
        raise PayloadCorruption("too few pairs for a DE header")
    V = 0
    for i in range(HEADER_BITS):
        out[i], b = de_extract_pair(tuple(pairs[i]))
        V = (V << 1) | b
    start = HEADER_BITS + V
    if start + V > len(pairs):
        raise PayloadCorruption(f"location map length {V} exceeds the image")
    location_map = []
    for i in range(HEADER_BITS, start):
        out[i], b = de_extract_pair(tuple(pairs[i]))
        location_map.append(b)
    bits = []
    for j, skipped in enumerate(location_map):
        if not skipped:
            out[start + j], b = de_extract_pair(tuple(pairs[start + j]))
            bits.append(b)
    return out.reshape(arr.shape).astype(arr.dtype), bits


def payload_bits_for(samples, rate: float = DEFAULT_RATE) -> int:
    return int(np.asarray(samples).size * rate)


def marked_de_embed(pk: PaillierPublicKey, image, bits: Sequence[int],
                    rng: Optional[random.Random] = None, counter=None):
    """Mark ``image`` with ``bits`` and encrypt every marked sample."""
    rng = rng if rng is not None else random.Random()
    marked = de_mark_samples(image, bits)
    return [encrypt_random(pk, int(v), rng, counter)[0] for v in np.asarray(marked).reshape(-1)]


def marked_de_extract(sk: PaillierSecretKey, pk: PaillierPublicKey,
                      stego: Sequence[PaillierCiphertext], shape=None, counter=None):
    """Decrypt to the marked samples, then undo DE; returns ``(image, bits)``."""
    samples = np.array([paillier_decrypt(sk, pk, c, counter) for c in stego], dtype=np.int64)
    if samples.size and (samples.min() < 0 or samples.max() > 255):
        raise PayloadCorruption("decrypted samples are not 8-bit values")
    if shape is not None:
        samples = samples.reshape(shape)
    return de_unmark_samples(samples)


# -- synthetic corpus and PGM I/O -------------------------------------------

def gradient_corpus(shape=IMAGE_SHAPE) -> list[np.ndarray]:
    """Four smooth 8-bit test images: horizontal, vertical, diagonal, radial."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(float)
    imgs = [
        32 + 0.75 * xx,
        48 + 0.9 * yy,
        40 + 0.5 * (xx + yy),
        128 + 24 * np.cos(np.hypot(xx - w / 2, yy - h / 2) / 24.0),
    ]
    return [np.clip(np.rint(im), 0, 255).astype(np.uint8) for im in imgs]


def uniform_noise_image(rng: np.random.Generator, shape=IMAGE_SHAPE) -> np.ndarray:
    return rng.integers(0, 256, size=shape).astype(np.uint8)


def write_pgm(path, image) -> None:
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError("PGM images are 2-D")
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + img.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise FormatError("only binary (P5) PGM is supported")
    try:
        w, h, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise FormatError("bad PGM header") from exc
    if maxval != 255:
        raise FormatError("only 8-bit PGM is supported")
    pixels = data[pos + 1:pos + 1 + w * h]
    if len(pixels) != w * h:
        raise FormatError("truncated PGM pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).copy()
