"""``sied`` command line: keys, embed/extract, decryption, grading, histograms, demos.

Exit codes: 0 success, 1 runtime failure, 2 grade expectation mismatch,
64 usage error, 65 malformed input data.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import baselines as bl
from .bits import bits_to_hex, hex_to_bits, random_bits
from .distances import count_peaks, histogram_pair
from .errors import FormatError, SiedError, StageFailure
from .framework import (
    assemble_keys,
    key_for,
    read_json,
    read_key,
    read_plaintexts,
    run_manifest,
    run_scenario,
    scheme_embed,
    scheme_extract,
    seeded,
    stego_from_record,
    stego_to_record,
)
from .harness import GradeConfig, GradeContext, grade_security
from .lwe import LweParams, LweSecretKey, lwe_keygen
from .paillier import PaillierPublicKey, fingerprint, paillier_keygen
from .schemes import REGISTRY, flat_ints, get_scheme
from .taxonomy import SecurityLevel

EXIT_OK, EXIT_RUNTIME, EXIT_EXPECT, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65
SEED_ENV = "SIED_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    seed: int
    scheme: Optional[str] = None
    trials: Optional[int] = None
    alpha: Optional[float] = None
    epsilon: Optional[float] = None
    paths: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def _write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _keys(paths):
    return assemble_keys(*(read_key(p) for p in paths or []))


# -- keygen ------------------------------------------------------------------

def cmd_keygen(args) -> int:
    seed = _seed(args)
    rng, nprng = seeded(seed)
    family = "lwe" if args.scheme in ("lwe", "lwe-toy", "plain-lwe") else "paillier"
    out = Path(args.out)
    if family == "lwe":
        sk = lwe_keygen(LweParams(args.n, args.q, args.sigma), nprng)
        rec = sk.to_record()
        sk_path = out.with_name(out.name + ".sk.json")
        _write_json(sk_path, rec)
        digest = hashlib.sha256(json.dumps(rec, sort_keys=True).encode()).hexdigest()[:16]
        print(f"lwe-sk {sk_path} fingerprint {digest}")
        return EXIT_OK
    pk, sk = paillier_keygen(args.prime_bits, rng)
    pk_path = out.with_name(out.name + ".pk.json")
    sk_path = out.with_name(out.name + ".sk.json")
    _write_json(pk_path, pk.to_record())
    _write_json(sk_path, sk.to_record())
    print(f"paillier N={pk.N.bit_length()} bits {pk_path} {sk_path} "
          f"fingerprint {fingerprint(pk)}")
    return EXIT_OK


# -- embed / extract / decrypt ----------------------------------------------

def _message(args, capacity: int, nprng) -> list[int]:
    if args.message is not None:
        return hex_to_bits(args.message, args.bits)
    if args.random_bits is not None:
        return random_bits(args.random_bits, nprng)
    return random_bits(capacity, nprng)


def _lwe_params(keys):
    return keys.encryption.params if isinstance(keys.encryption, LweSecretKey) else None


def cmd_embed(args) -> int:
    seed = _seed(args)
    rng, nprng = seeded(seed)
    scheme = get_scheme(args.scheme)
    keys = _keys(args.key)
    if args.covers is not None:
        _, covers, _ = stego_from_record(read_json(args.covers), _lwe_params(keys))
        plaintexts = None
    elif args.plaintexts is not None:
        plaintexts = read_plaintexts(args.plaintexts)
        if scheme.family == "lwe":
            plaintexts = np.asarray(plaintexts, dtype=np.int64)
        covers = scheme.encrypt(keys, plaintexts, rng, nprng)
    else:
        raise UsageError("embed needs --plaintexts or --covers")
    n_units = len(scheme.records(covers))
    bits = _message(args, scheme.capacity(n_units), nprng)
    if args.keyless:
        modulus = read_key(args.modulus_from).N if args.modulus_from else None
        if modulus is None and isinstance(keys.encryption, PaillierPublicKey):
            modulus = keys.encryption.N
        stego, trace = scheme_embed(scheme, None, covers, bits, rng=rng, nprng=nprng,
                                    rerandomize=True, modulus=modulus)
    else:
        stego, trace = scheme_embed(scheme, key_for(keys, scheme.descriptor.embed_role),
                                    covers, bits, plaintexts=plaintexts, rng=rng,
                                    nprng=nprng)
    _write_json(args.out, stego_to_record(scheme, stego, len(bits)))
    if args.trace:
        run = RunConfig("embed", seed, scheme.name, paths={"out": str(args.out)})
        _write_json(args.trace, {"run_config": run.as_dict(), "trace": trace})
    if args.out not in (None, "-"):
        print(bits_to_hex(bits))
    return EXIT_OK


def _load_bundle(args):
    keys = _keys(args.key)
    rec = read_json(args.stego)
    if not isinstance(rec, dict):
        raise FormatError(f"{args.stego}: stego bundle must be a JSON object")
    stored, bundle, nbits = stego_from_record(rec, _lwe_params(keys))
    scheme = get_scheme(args.scheme) if args.scheme else stored
    return scheme, keys, bundle, nbits


def cmd_extract(args) -> int:
    scheme, keys, bundle, nbits = _load_bundle(args)
    if args.bits is not None:
        nbits = args.bits
    key = key_for(keys, scheme.descriptor.extract_role)
    bits = scheme_extract(scheme, key, bundle, nbits)
    print(f"{len(bits)} {bits_to_hex(bits)}")
    return EXIT_OK


def cmd_decrypt(args) -> int:
    scheme, keys, bundle, _ = _load_bundle(args)
    if keys.decryption is None:
        raise SiedError("decrypt needs the secret key")
    values = [int(v) for v in scheme.decrypt(keys, bundle)]
    if args.out and str(args.out).lower().endswith(".pgm"):
        side = int(round(len(values) ** 0.5))
        if side * side != len(values):
            raise FormatError("PGM output needs a square number of samples")
        bl.write_pgm(args.out, np.asarray(values).reshape(side, side))
    else:
        _write_json(args.out, values)
    return EXIT_OK


# -- grade / hist -------------------------------------------------------------

def _grade_config(args, seed) -> GradeConfig:
    return GradeConfig(seed=seed, trials=args.trials, alpha=args.alpha, epsilon=args.epsilon,
                       prime_bits=args.prime_bits)


def cmd_grade(args) -> int:
    seed = _seed(args)
    cfg = _grade_config(args, seed)
    grade = grade_security(args.scheme, cfg)
    report = grade.as_dict()
    report["run_config"] = RunConfig("grade", seed, args.scheme, cfg.trials, cfg.alpha,
                                     cfg.epsilon, {"out": str(args.out)}).as_dict()
    _write_json(args.out, report)
    if args.out not in (None, "-"):
        print(f"{grade.scheme}: resisted {grade.resisted.name}")
    if args.expect is not None:
        want = SecurityLevel.parse(args.expect)
        if grade.resisted is not want:
            sys.stderr.write(f"expected {want.name}, graded {grade.resisted.name}\n")
            return EXIT_EXPECT
    return EXIT_OK


def _read_trace_csv(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    values = []
    for i, row in enumerate(csv.reader(io.StringIO(text))):
        if not row or not row[0].strip():
            continue
        try:
            values.append(float(row[0]))
        except ValueError:
            if i == 0:
                continue  # header line
            raise FormatError(f"{path}:{i + 1}: {row[0]!r} is not a number") from None
    if not values:
        raise FormatError(f"{path}: empty trace")
    arr = np.asarray(values)
    return arr.astype(np.int64) if np.all(np.mod(arr, 1) == 0) else arr


def _write_samples(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value"])
        for v in samples:
            w.writerow([v.item() if hasattr(v, "item") else v])


def cmd_hist(args) -> int:
    seed = _seed(args)
    if args.plain_trace or args.stego_trace:
        if not (args.plain_trace and args.stego_trace):
            raise UsageError("--plain-trace and --stego-trace go together")
        plain, stego = _read_trace_csv(args.plain_trace), _read_trace_csv(args.stego_trace)
        name = "trace"
    else:
        if args.scheme is None:
            raise UsageError("hist needs --scheme or a pair of trace files")
        cfg = GradeConfig(seed=seed, trials=args.trials, prime_bits=args.prime_bits)
        ctx = GradeContext(args.scheme, cfg)
        plain_sets = ctx.traces("random", "covers")
        stego_sets = ctx.traces("chosen", "stegos")
        name = args.trace_name or sorted(plain_sets)[0]
        if name not in plain_sets:
            raise UsageError(f"no trace {name!r}; available: {sorted(plain_sets)}")
        plain, stego = plain_sets[name].samples, stego_sets[name].samples
    hp, hs = histogram_pair(plain, stego, args.bins, domain=name)
    prefix = Path(args.out)
    outputs = {"plain": (hp, plain), "stego": (hs, stego)}
    for label, (h, samples) in outputs.items():
        prefix.with_name(f"{prefix.name}.{label}.csv").write_text(h.to_csv())
        if args.samples:
            _write_samples(prefix.with_name(f"{prefix.name}.{label}.samples.csv"), samples)
    if hp.counts.size >= 3:
        print(f"{name}: peaks plain={count_peaks(hp, args.min_prominence)} "
              f"stego={count_peaks(hs, args.min_prominence)}")
    return EXIT_OK


# -- demo ---------------------------------------------------------------------

def cmd_demo(args) -> int:
    seed = _seed(args)
    if args.manifest:
        _write_json(args.out, run_manifest(args.manifest))
        return EXIT_OK
    rng, nprng = seeded(seed)
    scheme = get_scheme(args.scheme)
    keys = scheme.generate_keys(args.prime_bits, LweParams(), rng, nprng)
    plaintexts = scheme.sample_plaintexts(keys, args.units, rng, nprng)
    n_units = len(flat_ints(plaintexts))
    bits = random_bits(min(scheme.capacity(n_units), args.max_bits), nprng)
    if scheme.name == "evr":
        bits = bits[:len(bits) - len(bits) % scheme.config.bits_per_symbol]
    d = scheme.descriptor
    print(f"[setup] scheme={d.name} mode={d.mode.value} embed-key={d.embed_role.value} "
          f"extract-key={d.extract_role.value} seed={seed}")
    print(f"[alice] message {len(bits)} bits: {bits_to_hex(bits) or '-'}")
    result = run_scenario(scheme, keys, plaintexts, bits, rng, nprng, keyless=args.keyless)
    for tap in result.transcript:
        if tap["tap"] == "stego-bundle":
            n = len(tap["record"].get("records", [])) + len(tap["record"].get("appendix", []))
            print(f"[channel] eve observes {n} records")
        else:
            print(f"[channel] eve observes {tap['tap']} = {tap['bytes']} bytes")
    print(f"[bob] extracted {len(result.bob_bits)} bits: "
          f"{bits_to_hex(result.bob_bits) or '-'}")
    marker = "inf" if result.psnr == float("inf") else (
        "n/a" if result.psnr is None else f"{result.psnr:.2f} dB")
    print(f"[receiver] decrypted {len(result.receiver_plaintexts)} plaintexts, PSNR {marker}")
    for name, ok in result.assertions.items():
        print(f"[check] {name}: {'ok' if ok else 'FAILED'}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sied", description="steganography in the encrypted domain")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    schemes = sorted(REGISTRY)

    def seed_arg(sp):
        sp.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")

    k = sub.add_parser("keygen", help="generate Paillier or LWE keys")
    k.add_argument("--scheme", default="paillier",
                   choices=["paillier", "lwe", *schemes])
    k.add_argument("--out", required=True, help="output prefix: PREFIX.pk.json, PREFIX.sk.json")
    k.add_argument("--prime-bits", type=int, default=512)
    k.add_argument("--n", type=int, default=32)
    k.add_argument("--q", type=int, default=12289)
    k.add_argument("--sigma", type=float, default=3.2)
    seed_arg(k)
    k.set_defaults(func=cmd_keygen)

    e = sub.add_parser("embed", help="embed a message into ciphertexts")
    e.add_argument("--scheme", required=True, choices=schemes)
    e.add_argument("--key", action="append", help="key file (repeatable)")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--plaintexts", help="JSON integer list or PGM image to encrypt")
    src.add_argument("--covers", help="existing ciphertext bundle to embed into")
    e.add_argument("--message", help="payload as hex")
    e.add_argument("--bits", type=int, help="payload bit count (default 4 per hex digit)")
    e.add_argument("--random-bits", type=int, help="embed this many random bits instead")
    e.add_argument("--keyless", action="store_true",
                   help="embed by re-randomizing covers with only the public modulus")
    e.add_argument("--modulus-from", help="public key file supplying N for --keyless")
    e.add_argument("--out", required=True, help="stego bundle path")
    e.add_argument("--trace", help="write the embedding process trace here")
    seed_arg(e)
    e.set_defaults(func=cmd_embed)

    for name, func, helptext in (("extract", cmd_extract, "print embedded bits as hex"),
                                 ("decrypt", cmd_decrypt, "decrypt a bundle")):
        x = sub.add_parser(name, help=helptext)
        x.add_argument("--stego", required=True)
        x.add_argument("--key", action="append")
        x.add_argument("--scheme", choices=schemes, help="override the bundle's scheme")
        if name == "extract":
            x.add_argument("--bits", type=int, help="override the stored bit count")
        else:
            x.add_argument("--out", help="JSON (default stdout) or .pgm")
        x.set_defaults(func=func)

    g = sub.add_parser("grade", help="run the four attack evaluators")
    g.add_argument("--scheme", required=True, choices=schemes)
    g.add_argument("--trials", type=int, default=10_000)
    g.add_argument("--alpha", type=float, default=0.01)
    g.add_argument("--epsilon", type=float, default=0.01)
    g.add_argument("--prime-bits", type=int, default=256)
    g.add_argument("--expect", help="exit 2 unless the resisted level equals this")
    g.add_argument("--out", help="report path (default stdout)")
    seed_arg(g)
    g.set_defaults(func=cmd_grade)

    h = sub.add_parser("hist", help="plain vs stego trace histograms as CSV")
    h.add_argument("--scheme", choices=schemes)
    h.add_argument("--trace-name")
    h.add_argument("--plain-trace")
    h.add_argument("--stego-trace")
    h.add_argument("--trials", type=int, default=10_000)
    h.add_argument("--prime-bits", type=int, default=256)
    h.add_argument("--bins", type=int, default=32)
    h.add_argument("--min-prominence", type=float, default=0.005)
    h.add_argument("--samples", action="store_true", help="also write the raw samples")
    h.add_argument("--out", required=True, help="prefix: PREFIX.plain.csv, PREFIX.stego.csv")
    seed_arg(h)
    h.set_defaults(func=cmd_hist)

    d = sub.add_parser("demo", help="run one Alice -> channel -> Bob exchange")
    d.add_argument("--scheme", default="evr", choices=schemes)
    d.add_argument("--units", type=int, default=16, help="number of plaintexts")
    d.add_argument("--max-bits", type=int, default=64)
    d.add_argument("--prime-bits", type=int, default=128)
    d.add_argument("--keyless", action="store_true")
    d.add_argument("--manifest", help="run a scenario manifest instead")
    d.add_argument("--out", help="result bundle path for --manifest (default stdout)")
    seed_arg(d)
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"sied: usage error: {exc}\n")
        return EXIT_USAGE
    except FormatError as exc:
        sys.stderr.write(f"sied: FormatError: {exc}\n")
        return EXIT_DATA
    except StageFailure as exc:
        sys.stderr.write(f"sied: stage {exc}\n")
        return EXIT_RUNTIME
    except Exception as exc:  # runtime failures map to exit 1, never a traceback
        sys.stderr.write(f"sied: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
