"""Hide a short text in the low bits of Paillier ciphertexts by re-randomizing
until each ciphertext's LSB equals the next message bit.

Anyone can read the bits back, no key needed, and decryption is untouched."""
import random
from collections import Counter

from sied.bits import bits_to_hex
from sied.evr import (
    EvrConfig,
    evr_embed_covers,
    evr_embed_message,
    evr_extract_message,
    refresh_count_pmf,
)
from sied.paillier import encrypt_random, paillier_decrypt, paillier_keygen

rng = random.Random(7)
pk, sk = paillier_keygen(128, rng)

text = b"meet at noon"
bits = [(byte >> (7 - i)) & 1 for byte in text for i in range(8)]
plaintexts = [rng.randrange(1000) for _ in bits]

stegos, trace = evr_embed_message(pk, plaintexts, bits, EvrConfig(), rng)
got = evr_extract_message(stegos)
decoded = bytes(int("".join(map(str, got[i:i + 8])), 2) for i in range(0, len(got), 8))
print("hidden :", text, "->", bits_to_hex(bits))
print("read   :", decoded)
print("plaintexts intact:", [paillier_decrypt(sk, pk, c) for c in stegos] == plaintexts)

# two bits per ciphertext: each refresh now succeeds with probability 1/4
cfg = EvrConfig(positions=(0, 1))
stegos2, trace2 = evr_embed_message(pk, plaintexts[:len(bits) // 2], bits, cfg, rng)
print("\ntwo positions, same message:", evr_extract_message(stegos2, cfg) == bits)
print(f"mean refreshes: 1 bit {trace.mean:.2f} (expect 1.0), 2 bits {trace2.mean:.2f} (expect 3.0)")

# the refresh count follows a geometric law
counts = Counter(trace.counts)
print("\nrefreshes  observed  expected")
for j in range(5):
    print(f"{j:9d}  {counts.get(j, 0):8d}  {refresh_count_pmf(j, 1) * len(bits):8.1f}")

# an interceptor with only the modulus can embed into someone else's ciphertexts
covers = [encrypt_random(pk, m, rng)[0] for m in plaintexts]
intercepted, _ = evr_embed_covers(pk.N, covers, bits, EvrConfig(), rng)
print("\nkeyless embed readable:", evr_extract_message(intercepted) == bits)
