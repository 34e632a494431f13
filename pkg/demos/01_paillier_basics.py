"""Paillier in a few lines: keys, encryption, the additive homomorphism,
re-randomization, and recovering the randomness with the secret key."""
import random

from sied.paillier import (
    decryption_trace,
    encrypt_random,
    homomorphic_add,
    keypair_from_primes,
    paillier_decrypt,
    paillier_encrypt,
    paillier_keygen,
    paillier_rerandomize,
)

# the textbook key: p = 5, q = 7, so N = 35 and ciphertexts live mod 1225
pk, sk = keypair_from_primes(5, 7)
print("N =", pk.N, " g =", pk.g, " lambda =", sk.lam, " mu =", sk.mu)
c = paillier_encrypt(pk, 3, 2)
print("Enc(3; r=2) =", c.value, "-> decrypts to", paillier_decrypt(sk, pk, c))

# a more realistic size
rng = random.Random(2024)
pk, sk = paillier_keygen(256, rng)
print(f"\n{pk.N.bit_length()}-bit modulus, {pk.ciphertext_bytes}-byte ciphertexts")

a, r_a = encrypt_random(pk, 1200, rng)
b, _ = encrypt_random(pk, 34, rng)
total = homomorphic_add(pk, a, b)
print("Enc(1200) * Enc(34) decrypts to", paillier_decrypt(sk, pk, total))

# multiplying by s^N changes the ciphertext but not the plaintext
s = rng.randrange(2, pk.N)
fresh = paillier_rerandomize(pk, a, s)
print("re-randomized ciphertext differs:", fresh != a)
print("still decrypts to", paillier_decrypt(sk, pk, fresh))

# the secret key also reveals the randomness: r' = r * s mod N
_, r_back = decryption_trace(sk, pk, fresh)
print("recovered randomness matches r*s:", r_back == r_a * s % pk.N)
