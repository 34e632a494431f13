"""Application modes, security levels and key roles."""
from __future__ import annotations

import enum
from dataclasses import dataclass


class SiedMode(str, enum.Enum):
    AC = "AC"    # all controlled
    EXC = "EXC"  # extraction controlled
    EMC = "EMC"  # embedding controlled
    AF = "AF"    # all free


_MODES = {
    (True, True): SiedMode.AC,
    (False, True): SiedMode.EXC,
    (True, False): SiedMode.EMC,
    (False, False): SiedMode.AF,
}


def classify_mode(alice_has_enc_key: bool, bob_has_dec_key: bool) -> SiedMode:
    return _MODES[(bool(alice_has_enc_key), bool(bob_has_dec_key))]


class SecurityLevel(enum.IntEnum):
    NONE = 0
    SCOA = 1
    KCA = 2
    CCA = 3
    ACCA = 4

    @classmethod
    def parse(cls, text: str) -> "SecurityLevel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown security level {text!r}") from None


ATTACK_LEVELS = (SecurityLevel.SCOA, SecurityLevel.KCA, SecurityLevel.CCA, SecurityLevel.ACCA)


class KeyRole(str, enum.Enum):
    NONE = "none"
    ENCRYPTION = "encryption"
    DECRYPTION = "decryption"
    DATA_HIDING = "data-hiding"


@dataclass(frozen=True)
class SchemeDescriptor:
    name: str
    mode: SiedMode
    embed_role: KeyRole
    extract_role: KeyRole
    claimed_level: SecurityLevel
    # every embedding step is an ordinary encryption operation
    standard_ops: bool = True
    carries_payload: bool = True
    summary: str = ""

    def __post_init__(self):
        expected = classify_mode(self.embed_role is KeyRole.ENCRYPTION,
                                 self.extract_role is KeyRole.DECRYPTION)
        if expected is not self.mode:
            raise ValueError(f"{self.name}: mode {self.mode.value} inconsistent with key "
                             f"roles (expected {expected.value})")

    def as_dict(self) -> dict:
        return {"name": self.name, "mode": self.mode.value,
                "embed_key": self.embed_role.value, "extract_key": self.extract_role.value,
                "claimed_level": self.claimed_level.name,
                "standard_ops": self.standard_ops}
