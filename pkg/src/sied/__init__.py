"""Steganography in the encrypted domain: schemes, scenarios and graded steganalysis."""
from .errors import SiedError
from .evr import EvrConfig, evr_embed_message, evr_extract_message
from .framework import run_scenario, scheme_embed, scheme_extract
from .harness import GradeConfig, grade_security
from .lwe import LweParams
from .paillier import paillier_decrypt, paillier_encrypt, paillier_keygen
from .schemes import REGISTRY, get_scheme
from .taxonomy import KeyRole, SchemeDescriptor, SecurityLevel, SiedMode, classify_mode

__version__ = "0.1.0"

__all__ = [
    "EvrConfig", "GradeConfig", "KeyRole", "LweParams", "REGISTRY", "SchemeDescriptor",
    "SecurityLevel", "SiedError", "SiedMode", "classify_mode", "evr_embed_message",
    "evr_extract_message", "get_scheme", "grade_security", "paillier_decrypt",
    "paillier_encrypt", "paillier_keygen", "run_scenario", "scheme_embed", "scheme_extract",
]
