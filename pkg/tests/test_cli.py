import json
import subprocess
import sys

import numpy as np
import pytest

from sied import baselines as bl
from sied.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def paillier_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("keys")
    assert main(["keygen", "--out", str(d / "k"), "--prime-bits", "64", "--seed", "1"]) == 0
    (d / "pt.json").write_text(json.dumps(list(range(200, 340))))
    return d


@pytest.fixture(scope="module")
def lwe_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("lwe")
    assert main(["keygen", "--scheme", "lwe", "--out", str(d / "k"), "--seed", "2"]) == 0
    (d / "pt.json").write_text(json.dumps([1, 0, 1, 1, 0, 0, 1, 0]))
    return d


def test_evr_hex_roundtrip(capsys, paillier_files, tmp_path):
    d = paillier_files
    message = "0123456789abcdef0011223344556677"  # 128 bits
    code, out, _ = run(capsys, "embed", "--scheme", "evr", "--key", d / "k.pk.json",
                       "--plaintexts", d / "pt.json", "--message", message,
                       "--out", tmp_path / "s.json", "--trace", tmp_path / "t.json", "--seed", 3)
    assert code == 0 and out.strip() == message
    code, out, _ = run(capsys, "extract", "--stego", tmp_path / "s.json")
    assert code == 0 and out.split() == ["128", message]
    code, out, _ = run(capsys, "decrypt", "--stego", tmp_path / "s.json",
                       "--key", d / "k.pk.json", "--key", d / "k.sk.json")
    assert code == 0 and json.loads(out) == list(range(200, 340))
    trace = json.loads((tmp_path / "t.json").read_text())
    assert trace["run_config"]["seed"] == 3 and len(trace["trace"]["invocations"]) == 140


def test_keyless_embed_into_existing_covers(capsys, paillier_files, tmp_path):
    d = paillier_files
    run(capsys, "embed", "--scheme", "plain-paillier", "--key", d / "k.pk.json",
        "--plaintexts", d / "pt.json", "--random-bits", 0, "--out", tmp_path / "c.json")
    rec = json.loads((tmp_path / "c.json").read_text())
    rec["scheme"] = "evr"
    (tmp_path / "c.json").write_text(json.dumps(rec))
    code, _, _ = run(capsys, "embed", "--scheme", "evr", "--covers", tmp_path / "c.json",
                     "--keyless", "--modulus-from", d / "k.pk.json", "--message", "f0",
                     "--out", tmp_path / "s.json")
    assert code == 0
    assert run(capsys, "extract", "--stego", tmp_path / "s.json")[1].split() == ["8", "f0"]


def test_lwe_roundtrip(capsys, lwe_files, tmp_path):
    d = lwe_files
    code, _, _ = run(capsys, "embed", "--scheme", "lwe-toy", "--key", d / "k.sk.json",
                     "--plaintexts", d / "pt.json", "--message", "a5", "--out", tmp_path / "s.json")
    assert code == 0
    code, out, _ = run(capsys, "extract", "--stego", tmp_path / "s.json", "--key", d / "k.sk.json")
    assert out.split() == ["8", "a5"]
    code, out, _ = run(capsys, "decrypt", "--stego", tmp_path / "s.json", "--key", d / "k.sk.json")
    assert json.loads(out) == [1, 0, 1, 1, 0, 0, 1, 0]
    # without the key the stored dimension still parses, so the error is the key role
    code, _, err = run(capsys, "extract", "--stego", tmp_path / "s.json")
    assert code == 1 and "KeyRoleMismatch" in err


def test_marked_de_decrypts_to_pgm(capsys, paillier_files, tmp_path):
    d = paillier_files
    image = bl.gradient_corpus()[0]
    bl.write_pgm(tmp_path / "in.pgm", image)
    code, _, _ = run(capsys, "embed", "--scheme", "marked-de", "--key", d / "k.pk.json",
                     "--plaintexts", tmp_path / "in.pgm", "--message", "beef",
                     "--out", tmp_path / "s.json")
    assert code == 0
    code, _, _ = run(capsys, "decrypt", "--stego", tmp_path / "s.json", "--key",
                     d / "k.pk.json", "--key", d / "k.sk.json", "--out", tmp_path / "out.pgm")
    marked = bl.read_pgm(tmp_path / "out.pgm")
    assert code == 0 and 0 < np.abs(marked.astype(int) - image).sum()
    restored, bits = bl.de_unmark_samples(marked)
    assert np.array_equal(restored, image) and len(bits) == 16


def test_extract_on_non_stego_input_is_total(capsys, paillier_files, tmp_path):
    d = paillier_files
    run(capsys, "embed", "--scheme", "plain-paillier", "--key", d / "k.pk.json",
        "--plaintexts", d / "pt.json", "--random-bits", 0, "--out", tmp_path / "c.json")
    code, out, _ = run(capsys, "extract", "--stego", tmp_path / "c.json", "--scheme", "evr",
                       "--bits", 16)
    assert code == 0 and out.split()[0] == "16"


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["grade"], ["embed", "--scheme", "evr"],
                                  ["grade", "--scheme", "nope"],
                                  ["keygen", "--out", "x", "--prime-bits", "many"]])
def test_usage_errors_exit_64(capsys, argv):
    assert run(capsys, *argv)[0] == 64


def test_data_format_errors_exit_65(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "extract", "--stego", bad)[0] == 65
    bad.write_text("[1, 2, 3]")
    assert run(capsys, "extract", "--stego", bad)[0] == 65
    assert run(capsys, "extract", "--stego", tmp_path / "missing.json")[0] == 65
    assert run(capsys, "hist", "--plain-trace", bad, "--stego-trace", bad,
               "--out", tmp_path / "h")[0] == 65


def test_runtime_errors_exit_1(capsys, paillier_files, tmp_path):
    d = paillier_files
    # expansion-lsb needs the encryption key
    code, _, err = run(capsys, "embed", "--scheme", "expansion-lsb", "--plaintexts",
                       d / "pt.json", "--message", "1", "--out", tmp_path / "s.json")
    assert code == 1 and err.startswith("sied: ") and "Traceback" not in err
    # more bits than covers
    code, _, _ = run(capsys, "embed", "--scheme", "evr", "--key", d / "k.pk.json",
                     "--plaintexts", d / "pt.json", "--random-bits", 1000,
                     "--out", tmp_path / "s.json")
    assert code == 1


def test_grade_expect_mismatch_exits_2(capsys, tmp_path):
    code, out, err = run(capsys, "grade", "--scheme", "lwe-toy", "--expect", "ACCA",
                         "--out", tmp_path / "g.json")
    assert code == 2 and "expected ACCA, graded KCA" in err
    rep = json.loads((tmp_path / "g.json").read_text())
    assert rep["resisted"] == "KCA" and rep["run_config"]["command"] == "grade"
    assert run(capsys, "grade", "--scheme", "lwe-toy", "--expect", "KCA",
               "--out", tmp_path / "g.json")[0] == 0


def test_hist_is_byte_identical(capsys, tmp_path):
    for run_id in ("a", "b"):
        code, out, _ = run(capsys, "hist", "--scheme", "lwe-toy", "--trials", 3000, "--seed", 9,
                           "--samples", "--out", tmp_path / run_id)
        assert code == 0 and out.startswith("lwe.noise: peaks")
    for part in ("plain.csv", "stego.csv", "plain.samples.csv"):
        assert (tmp_path / f"a.{part}").read_bytes() == (tmp_path / f"b.{part}").read_bytes()
    header = (tmp_path / "a.plain.csv").read_text().splitlines()[0]
    assert header == "bin_low,bin_high,count"


def test_hist_from_trace_files(capsys, tmp_path):
    (tmp_path / "p.csv").write_text("value\n" + "\n".join(str(i % 7) for i in range(300)))
    (tmp_path / "s.csv").write_text("value\n" + "\n".join(str(2 * (i % 4)) for i in range(300)))
    code, out, _ = run(capsys, "hist", "--plain-trace", tmp_path / "p.csv",
                       "--stego-trace", tmp_path / "s.csv", "--out", tmp_path / "h")
    # stego occupies 0, 2, 4, 6; only the interior teeth 2 and 4 count as peaks
    assert code == 0 and out.strip() == "trace: peaks plain=0 stego=2"
    assert run(capsys, "hist", "--plain-trace", tmp_path / "p.csv", "--out", tmp_path / "h")[0] == 64


def test_seed_falls_back_to_environment(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("SIED_SEED", "5")
    run(capsys, "keygen", "--out", tmp_path / "env", "--prime-bits", 32)
    run(capsys, "keygen", "--out", tmp_path / "flag", "--prime-bits", 32, "--seed", 5)
    assert (tmp_path / "env.pk.json").read_text() == (tmp_path / "flag.pk.json").read_text()
    monkeypatch.setenv("SIED_SEED", "five")
    assert run(capsys, "keygen", "--out", tmp_path / "x", "--prime-bits", 32)[0] == 64


def test_demo(capsys):
    code, out, _ = run(capsys, "demo", "--scheme", "evr", "--units", 8, "--prime-bits", 32,
                       "--seed", 1)
    assert code == 0
    assert "[check] extract_roundtrip: ok" in out and "[check] decrypts_to_plaintext: ok" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sied.cli", "--help"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0 and "grade" in proc.stdout
