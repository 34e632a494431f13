"""Grade every scheme against the four attacks at a toy key size.

The full-size grades (512-bit moduli) are what the acceptance tests run; this
version finishes in a few seconds and usually lands on the same levels."""
from sied.harness import GradeConfig, grade_security
from sied.schemes import NULL_SCHEMES, STEGO_SCHEMES

print(f"{'scheme':15s} {'claimed':8s} {'resisted':8s}  SCOA  KCA  CCA  ACCA")
for name in STEGO_SCHEMES + NULL_SCHEMES:
    grade = grade_security(name, GradeConfig(seed=1, prime_bits=32))
    marks = "  ".join(("pass" if v.passed else "FAIL") for v in grade.verdicts)
    print(f"{name:15s} {grade.claimed.name:8s} {grade.resisted.name:8s}  {marks}")

evr = grade_security("evr", GradeConfig(seed=1, prime_bits=32))
acca = evr.verdicts[-1]
print(f"\nevr ACCA: {acca.info['mean_invocations_stego']:.2f} encryptions per stego "
      f"ciphertext vs {acca.info['mean_invocations_plain']:.0f} for plain encryption")
