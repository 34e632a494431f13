"""Two deliberately weak reference schemes.

Difference expansion changes the decrypted image a little, so PSNR stays finite.
Expansion-LSB ships extra ciphertexts, so the bundle size gives it away."""
import random

import numpy as np

from sied.baselines import (
    de_mark_samples,
    de_unmark_samples,
    expansion_embed,
    expansion_extract,
    gradient_corpus,
    payload_bits_for,
)
from sied.distances import psnr
from sied.paillier import encrypt_random, paillier_keygen

rng = random.Random(3)
nprng = np.random.default_rng(3)

print("image       bits   PSNR dB   max change")
for name, image in zip(("horizontal", "vertical", "diagonal", "radial"), gradient_corpus()):
    bits = nprng.integers(0, 2, payload_bits_for(image)).tolist()
    marked = de_mark_samples(image, bits)
    restored, out = de_unmark_samples(marked)
    assert out == bits and np.array_equal(restored, image)
    change = np.abs(marked.astype(int) - image).max()
    print(f"{name:10s}  {len(bits):4d}   {psnr(image, marked):7.2f}   {change}")

pk, sk = paillier_keygen(64, rng)
covers = [encrypt_random(pk, m, rng)[0] for m in range(16)]
stego = expansion_embed(pk, covers, [1, 0, 1, 1], rng)
print(f"\nexpansion-lsb: {len(covers)} covers -> {len(stego.records)} records "
      f"({stego.serialized_size(pk)} vs {len(covers) * pk.ciphertext_bytes} bytes)")
print("bits:", expansion_extract(sk, pk, stego))
