"""A toy LWE scheme that hides bits in the parity of the encryption noise.

Ciphertexts look like ordinary ones, but whoever decrypts sees only one noise
parity, which shows up as a comb in the noise histogram."""
import numpy as np

from sied.distances import count_peaks, histogram_pair, ks_two_sample
from sied.lwe import (
    LweParams,
    lwe_decrypt_many,
    lwe_embed_many,
    lwe_encrypt_many,
    lwe_extract_many,
    lwe_keygen,
    lwe_noise_many,
)

rng = np.random.default_rng(5)
sk = lwe_keygen(LweParams(), rng)
n = 20_000

m = rng.integers(0, 2, n)
plain, _ = lwe_encrypt_many(sk, m, rng)
stego, _, draws = lwe_embed_many(sk, m, np.zeros(n, int), rng)  # every noise value even

print("decrypts correctly:", np.array_equal(lwe_decrypt_many(sk, stego), m))
print("payload read back :", int(lwe_extract_many(sk, stego).sum()) == 0)
print(f"noise draws per ciphertext: {draws.mean():.2f}")

a, b = lwe_noise_many(sk, plain), lwe_noise_many(sk, stego)
ha, hb = histogram_pair(a, b)
print(f"\npeaks: plain {count_peaks(ha)}, stego {count_peaks(hb)}")
print(f"KS p-value: {ks_two_sample(a, b)[1]:.2e}")

print("\n  e   plain  stego")
for lo, ca, cb in zip(ha.edges[:-1], ha.counts, hb.counts):
    e = int(lo + 0.5)
    if -6 <= e <= 6:
        print(f"{e:3d}  {'#' * (ca // 200):<12s} {'#' * (cb // 200)}")
