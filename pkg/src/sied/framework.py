"""Scheme-agnostic embed/extract dispatch and the end-to-end scenario runner.

A scenario plays the whole exchange: the plaintexts are encrypted, Alice
embeds the message, the bundle crosses an open channel (where everything
that is visible gets written to the transcript), Bob extracts, and the
legitimate receiver decrypts.  The receiver's output is then checked
against the scheme's contract.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import baselines as bl
from .bits import bits_to_hex, check_bits, hex_to_bits
from .distances import psnr_exact
from .errors import FormatError, KeyRoleMismatch, SiedError, StageFailure
from .lwe import LweBatch, LweCiphertext, LweSecretKey
from .paillier import PaillierCiphertext, PaillierPublicKey, PaillierSecretKey
from .schemes import Scheme, SchemeKeys, flat_ints, get_scheme, require_role
from .taxonomy import KeyRole, SchemeDescriptor

STAGES = ("encrypt", "embed", "channel", "extract", "decrypt", "check")


def seeded(seed: int):
    """Independent ``(random.Random, numpy Generator)`` streams for one seed."""
    ss = np.random.SeedSequence(int(seed))
    py_state, np_seq = ss.spawn(2)
    py_seed = int(py_state.generate_state(2, np.uint64)[0])
    return random.Random(py_seed), np.random.default_rng(np_seq)


# -- dispatch ---------------------------------------------------------------

def scheme_embed(descriptor, embed_key, covers, message: Sequence[int], *,
                 plaintexts=None, rng: Optional[random.Random] = None,
                 nprng: Optional[np.random.Generator] = None, rerandomize: bool = False,
                 modulus: Optional[int] = None, counter=None):
    """Embed ``message`` with the named scheme; returns ``(stego, trace)``.

    ``rerandomize=True`` with ``embed_key=None`` selects the keyless path,
    which only schemes able to refresh a ciphertext from the public modulus
    support (EVR).  The trace always has an ``"invocations"`` entry.
    """
    scheme = get_scheme(descriptor)
    rng = rng if rng is not None else random.Random()
    nprng = nprng if nprng is not None else np.random.default_rng()
    message = check_bits(message)
    if embed_key is None and rerandomize:
        if scheme.name != "evr":
            raise KeyRoleMismatch(f"{scheme.name} has no keyless embedding")
        return scheme.embed(None, covers, None, message, rng, nprng, modulus=modulus,
                            counter=counter)
    role = scheme.descriptor.embed_role
    if role is not KeyRole.NONE and embed_key is None:
        raise KeyRoleMismatch(f"{scheme.name} embedding needs the "
                              f"{role.value} key")
    require_role(embed_key, role, f"{scheme.name} embedding")
    return scheme.embed(embed_key, covers, plaintexts, message, rng, nprng, counter=counter)


def scheme_extract(descriptor, extract_key, stego, nbits: Optional[int] = None) -> list[int]:
    scheme = get_scheme(descriptor)
    role = scheme.descriptor.extract_role
    if role is not KeyRole.NONE and extract_key is None:
        raise KeyRoleMismatch(f"{scheme.name} extraction needs the "
                              f"{role.value} key")
    require_role(extract_key, role, f"{scheme.name} extraction")
    return scheme.extract(extract_key, stego, nbits)


def key_for(keys: SchemeKeys, role: KeyRole):
    if role is KeyRole.ENCRYPTION:
        return keys.encryption
    if role is KeyRole.DECRYPTION:
        return keys.decryption
    return None


# -- bundle records -----------------------------------------------------------

def stego_to_record(scheme, bundle, nbits: Optional[int] = None) -> dict:
    scheme = get_scheme(scheme)
    rec: dict[str, Any] = {"scheme": scheme.name}
    if scheme.name == "evr":
        rec.update(scheme.config.header())
    if isinstance(bundle, bl.ExpansionStego):
        rec["original"] = [c.to_record() for c in bundle.original]
        rec["appendix"] = [c.to_record() for c in bundle.appendix]
    elif isinstance(bundle, LweBatch):
        rec["params"] = {"n": int(bundle.A.shape[1]) if bundle.A.ndim == 2 else 0}
        rec["records"] = [{"a": [int(v) for v in row], "b": int(b)}
                          for row, b in zip(bundle.A, bundle.b)]
    else:
        rec["records"] = [c.to_record() for c in bundle]
    if nbits is not None:
        rec["nbits"] = int(nbits)
    return rec


def stego_from_record(rec: dict, params=None):
    """Inverse of :func:`stego_to_record`; returns ``(scheme, bundle, nbits)``."""
    try:
        scheme = get_scheme(rec["scheme"])
        if "appendix" in rec:
            bundle = bl.ExpansionStego(
                tuple(PaillierCiphertext.from_record(r) for r in rec["original"]),
                tuple(PaillierCiphertext.from_record(r) for r in rec["appendix"]))
        elif scheme.family == "lwe":
            cts = [LweCiphertext.from_record(r) for r in rec["records"]]
            n = params.n if params is not None else int(rec.get("params", {}).get("n", 0))
            if any(len(c.a) != n for c in cts):
                raise FormatError(f"LWE records do not have dimension {n}")
            bundle = LweBatch(np.array([c.a for c in cts], dtype=np.int64).reshape(-1, n),
                              np.array([c.b for c in cts], dtype=np.int64))
        else:
            bundle = [PaillierCiphertext.from_record(r) for r in rec["records"]]
        if scheme.name == "evr" and list(rec.get("positions", [0])) != list(
                scheme.config.positions):
            raise FormatError(f"bundle positions {rec.get('positions')} do not match "
                              f"{list(scheme.config.positions)}")
        nbits = rec.get("nbits")
        return scheme, bundle, None if nbits is None else int(nbits)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed stego bundle: {exc}") from exc


# -- key files -------------------------------------------------------------------

def key_from_record(rec: dict):
    kind = rec.get("kind") if isinstance(rec, dict) else None
    if kind == "paillier-pk":
        return PaillierPublicKey.from_record(rec)
    if kind == "paillier-sk":
        return PaillierSecretKey.from_record(rec)
    if kind == "lwe-sk":
        return LweSecretKey.from_record(rec)
    raise FormatError(f"unknown key record kind {kind!r}")


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not JSON: {exc}") from exc


def read_key(path):
    return key_from_record(read_json(path))


def assemble_keys(*loaded) -> SchemeKeys:
    """Build :class:`SchemeKeys` from any mix of loaded key objects."""
    pk = next((k for k in loaded if isinstance(k, PaillierPublicKey)), None)
    sk = next((k for k in loaded if isinstance(k, PaillierSecretKey)), None)
    lwe = next((k for k in loaded if isinstance(k, LweSecretKey)), None)
    if lwe is not None:
        return SchemeKeys(lwe, lwe)
    if sk is not None and pk is None:
        raise KeyRoleMismatch("a Paillier secret key needs its public key")
    if pk is not None and sk is not None and pk.N != sk.p * sk.q:
        raise KeyRoleMismatch("public and secret key do not match")
    return SchemeKeys(pk, (pk, sk) if sk is not None else None)


# -- scenarios ---------------------------------------------------------------------

@dataclass
class ScenarioResult:
    scheme: str
    records: Any
    bob_bits: list
    receiver_plaintexts: list
    transcript: list
    assertions: dict
    psnr: Optional[float]
    trace: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"scheme": self.scheme,
                "stego": stego_to_record(self.scheme, self.records, len(self.bob_bits)),
                "bob_bits_hex": bits_to_hex(self.bob_bits), "bob_nbits": len(self.bob_bits),
                "transcript": self.transcript, "assertions": self.assertions,
                "psnr": _psnr_value(self.psnr)}


def _psnr_value(value):
    if value is None:
        return None
    return "inf" if value == float("inf") else round(value, 6)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageFailure:
        raise
    except (SiedError, ValueError) as exc:
        raise StageFailure(name, f"{type(exc).__name__}: {exc}") from exc


def _contract(scheme: Scheme, plaintexts, received) -> tuple[str, bool]:
    original = flat_ints(plaintexts)
    received = [int(v) for v in received]
    if scheme.name == "marked-de":
        # receiver sees marked samples; undoing DE must give the originals back
        block = scheme.psnr_block
        restored = []
        for i in range(0, len(received), block):
            img, _ = bl.de_unmark_samples(np.array(received[i:i + block], dtype=np.int64))
            restored.extend(int(v) for v in img)
        return "restored_after_unmarking", restored == original
    return "decrypts_to_plaintext", received == original


def run_scenario(descriptor, keys: SchemeKeys, plaintexts, message: Sequence[int],
                 rng: Optional[random.Random] = None,
                 nprng: Optional[np.random.Generator] = None,
                 keyless: bool = False) -> ScenarioResult:
    """Encrypt, embed, transmit, extract, decrypt and check one exchange.

    ``keyless=True`` has Alice embed into the already-encrypted covers with
    only the public modulus, as an interceptor would.  Any stage error is
    re-raised as :class:`StageFailure` naming the stage.
    """
    scheme = get_scheme(descriptor)
    rng = rng if rng is not None else random.Random()
    nprng = nprng if nprng is not None else np.random.default_rng()
    message = check_bits(message)
    transcript: list[dict] = []

    covers = _stage("encrypt", scheme.encrypt, keys, plaintexts, rng, nprng)
    if keyless:
        modulus = keys.encryption.N
        stego, trace = _stage("embed", scheme_embed, scheme, None, covers, message,
                              rng=rng, nprng=nprng, rerandomize=True, modulus=modulus)
    else:
        stego, trace = _stage("embed", scheme_embed, scheme,
                              key_for(keys, scheme.descriptor.embed_role), covers, message,
                              plaintexts=plaintexts, rng=rng, nprng=nprng)

    # Eve sees what crosses the channel: the bundle and its size, nothing else
    transcript.append({"stage": "channel", "tap": "cover-size",
                       "bytes": _stage("channel", scheme.serialized_size, keys, covers)})
    transcript.append({"stage": "channel", "tap": "stego-size",
                       "bytes": _stage("channel", scheme.serialized_size, keys, stego)})
    transcript.append({"stage": "channel", "tap": "stego-bundle",
                       "record": stego_to_record(scheme, stego)})

    bob_bits = _stage("extract", scheme_extract, scheme,
                      key_for(keys, scheme.descriptor.extract_role), stego, len(message))
    received = _stage("decrypt", scheme.decrypt, keys, stego)

    name, ok = _contract(scheme, plaintexts, received)
    assertions = {"extract_roundtrip": bob_bits == message, name: ok}
    ref = flat_ints(plaintexts)
    value = psnr_exact(ref, received, scheme.psnr_max) if ref else None
    if not all(assertions.values()):
        failed = sorted(k for k, v in assertions.items() if not v)
        raise StageFailure("check", f"scenario assertions failed: {failed}")
    return ScenarioResult(scheme.name, stego, bob_bits, list(received), transcript,
                          assertions, value, trace)


# -- manifests ---------------------------------------------------------------------

def read_plaintexts(path):
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return bl.read_pgm(path).reshape(-1).astype(np.int64).tolist()
    data = read_json(path)
    if not isinstance(data, list) or not all(isinstance(v, int) for v in data):
        raise FormatError(f"{path}: plaintext file must be a JSON list of integers")
    return data


def run_manifest(path) -> dict:
    """Run the scenario described by a JSON manifest and return the result bundle.

    Manifest fields: ``scheme``, optional ``mode`` (checked against the
    scheme), ``keys`` (list of key file paths, relative to the manifest),
    ``plaintexts`` (JSON list or PGM path), ``message_hex`` with optional
    ``message_bits``, ``seed`` and optional ``keyless``.
    """
    path = Path(path)
    man = read_json(path)
    if not isinstance(man, dict):
        raise FormatError("manifest must be a JSON object")
    try:
        scheme = get_scheme(man["scheme"])
        base = path.parent
        keys = assemble_keys(*(read_key(base / p) for p in man.get("keys", [])))
        plaintexts = read_plaintexts(base / man["plaintexts"])
        message = hex_to_bits(man.get("message_hex", ""), man.get("message_bits"))
        seed = int(man.get("seed", 0))
    except KeyError as exc:
        raise FormatError(f"manifest is missing {exc}") from exc
    mode = man.get("mode")
    if mode is not None and mode != scheme.descriptor.mode.value:
        raise FormatError(f"manifest mode {mode} does not match {scheme.name} "
                          f"({scheme.descriptor.mode.value})")
    rng, nprng = seeded(seed)
    result = run_scenario(scheme, keys, plaintexts, message, rng, nprng,
                          keyless=bool(man.get("keyless", False)))
    out = result.as_dict()
    out["manifest"] = man
    return out
