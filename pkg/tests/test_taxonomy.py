import pytest

from sied.schemes import NULL_SCHEMES, REGISTRY, STEGO_SCHEMES
from sied.taxonomy import (
    ATTACK_LEVELS,
    KeyRole,
    SchemeDescriptor,
    SecurityLevel,
    SiedMode,
    classify_mode,
)


@pytest.mark.parametrize("alice,bob,mode", [(True, True, SiedMode.AC), (False, True, SiedMode.EXC),
                                            (True, False, SiedMode.EMC),
                                            (False, False, SiedMode.AF)])
def test_classify_mode_exhaustive(alice, bob, mode):
    assert classify_mode(alice, bob) is mode


def test_modes_are_distinct():
    assert len({classify_mode(a, b) for a in (0, 1) for b in (0, 1)}) == 4


def test_descriptor_rejects_inconsistent_mode():
    with pytest.raises(ValueError, match="inconsistent"):
        SchemeDescriptor("bad", SiedMode.AF, KeyRole.ENCRYPTION, KeyRole.NONE,
                         SecurityLevel.SCOA)


def test_level_order_and_parse():
    assert list(SecurityLevel) == sorted(SecurityLevel)
    assert SecurityLevel.NONE < SecurityLevel.SCOA < SecurityLevel.KCA
    assert SecurityLevel.KCA < SecurityLevel.CCA < SecurityLevel.ACCA
    assert SecurityLevel.parse(" cca ") is SecurityLevel.CCA
    assert ATTACK_LEVELS[0] is SecurityLevel.SCOA and len(ATTACK_LEVELS) == 4
    with pytest.raises(ValueError):
        SecurityLevel.parse("ultra")


@pytest.mark.parametrize("name,mode", [("evr", "EMC"), ("lwe-toy", "AC"), ("marked-de", "AC"),
                                       ("expansion-lsb", "AC"), ("plain-paillier", "AF"),
                                       ("plain-lwe", "AF")])
def test_registered_modes(name, mode):
    d = REGISTRY[name].descriptor
    assert d.mode.value == mode
    assert d.as_dict()["mode"] == mode


def test_registry_partition():
    assert set(STEGO_SCHEMES) | set(NULL_SCHEMES) == set(REGISTRY)
    assert not set(STEGO_SCHEMES) & set(NULL_SCHEMES)
    for name in NULL_SCHEMES:
        assert not REGISTRY[name].descriptor.carries_payload
