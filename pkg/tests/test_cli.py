import json

import pytest

from oblivion.cli import EXIT_CRYPTO, EXIT_OK, EXIT_REJECTED, EXIT_SCENARIO, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestKeysAndBits:
    def test_eval_round_trip(self, tmp_path, capsys):
        prefix = str(tmp_path / "k")
        assert run(capsys, "keygen", "eval", "--params", "1024,16,32", "--seed", "3", "--out", prefix)[0] == EXIT_OK
        ct = str(tmp_path / "c.ct")
        assert run(capsys, "encrypt", "--key", prefix + ".pub", "--out", ct, "1011")[0] == EXIT_OK
        code, out, _ = run(capsys, "decrypt", "--key", prefix + ".sec", ct)
        assert code == EXIT_OK and out.strip() == "1011"

    def test_wrong_key(self, tmp_path, capsys):
        for seed in ("3", "4"):
            run(capsys, "keygen", "eval", "--backend", "clear", "--seed", seed, "--out", str(tmp_path / seed))
        ct = str(tmp_path / "c.ct")
        run(capsys, "encrypt", "--key", str(tmp_path / "3.pub"), "--out", ct, "10")
        code, _, err = run(capsys, "decrypt", "--key", str(tmp_path / "4.sec"), ct)
        assert code == EXIT_CRYPTO and "KeyMismatch" in err

    def test_auth_keygen(self, tmp_path, capsys):
        code, out, _ = run(capsys, "keygen", "auth", "--principal", "bob", "--seed", "7", "--out", str(tmp_path / "bob"))
        assert code == EXIT_OK and "bob" in out
        assert (tmp_path / "bob.pub").read_text().startswith("OBLIVION-AUTHKEY v1")

    def test_bad_bits(self, tmp_path, capsys):
        run(capsys, "keygen", "eval", "--backend", "clear", "--out", str(tmp_path / "k"))
        assert run(capsys, "encrypt", "--key", str(tmp_path / "k.pub"), "10x1")[0] == EXIT_USAGE

    def test_usage_errors(self, capsys):
        assert run(capsys, "frobnicate")[0] == EXIT_USAGE
        assert run(capsys, "keygen", "eval")[0] == EXIT_USAGE
        assert run(capsys, "decrypt", "--key", "/nonexistent", "x")[0] == EXIT_USAGE


class TestCircuit:
    def test_build_and_check(self, tmp_path, capsys):
        path = str(tmp_path / "eq.circ")
        assert run(capsys, "circuit", "build", "equality", "--width", "4", "--out", path)[0] == EXIT_OK
        code, out, _ = run(capsys, "circuit", "check", path)
        assert code == EXIT_OK and "inputs=8" in out and "mult_depth=2" in out

    def test_check_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.circ"
        path.write_text("OBLIVION-CIRCUIT v1 inputs=1\ng0 = MAJ w0\noutputs = w1\n")
        code, _, err = run(capsys, "circuit", "check", str(path))
        assert code == EXIT_USAGE and ":2" in err


class TestPolicy:
    def test_compile_and_encrypt(self, tmp_path, capsys):
        from importlib import resources

        prb = str(resources.files("oblivion") / "scenarios" / "policy.prb")
        for name, seed in (("alice", "101"), ("bob", "202")):
            run(capsys, "keygen", "auth", "--principal", name, "--seed", seed, "--out", str(tmp_path / name))
        refs = ["--principal", f"alice={tmp_path / 'alice.pub'}", "--principal", f"bob={tmp_path / 'bob.pub'}"]
        code, out, _ = run(capsys, "policy", "compile", prb, *refs)
        assert code == EXIT_OK and out.startswith("OBLIVION-CIRCUIT v1")
        run(capsys, "keygen", "eval", "--backend", "clear", "--out", str(tmp_path / "k"))
        code, out, _ = run(capsys, "policy", "encrypt", prb, *refs, "--key", str(tmp_path / "k.pub"), "--pad-to", "4")
        assert code == EXIT_OK and "rules=4" in out.splitlines()[0]

    def test_unresolved_principal(self, capsys):
        from importlib import resources

        prb = str(resources.files("oblivion") / "scenarios" / "policy.prb")
        assert run(capsys, "policy", "compile", prb)[0] == EXIT_USAGE


class TestRun:
    def test_list(self, capsys):
        code, out, _ = run(capsys, "run", "--list")
        assert code == EXIT_OK and "attack_forged_request" in out.split()

    def test_expected_rejection_passes(self, tmp_path, capsys):
        code, out, _ = run(capsys, "run", "attack_forged_request", "--out", str(tmp_path))
        assert code == EXIT_OK
        assert "SignatureRejected (expected)" in out
        assert (tmp_path / "transcript.jsonl").exists()
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["passed"] is True

    def test_unexpected_rejection(self, tmp_path, capsys):
        from oblivion.cli import bundled_scenarios

        spec = json.loads(bundled_scenarios()["attack_nonadmin_prb_write"].read_text())
        for step in spec["script"]:
            step.pop("expect", None)
        path = tmp_path / "s.json"
        spec["prb"] = {"file": str(bundled_scenarios()["empty"].parent / "policy.prb")}
        path.write_text(json.dumps(spec))
        code, out, _ = run(capsys, "run", str(path))
        assert code == EXIT_REJECTED and "FAIL" in out

    def test_unknown_scenario(self, capsys):
        assert run(capsys, "run", "no_such_scenario")[0] == EXIT_SCENARIO

    def test_quiet_and_global_flag_position(self, capsys):
        code, out, _ = run(capsys, "--quiet", "run", "empty")
        assert code == EXIT_OK and out == ""
        code, out, _ = run(capsys, "run", "mssp_happy", "--backend", "clear", "--quiet")
        assert code == EXIT_OK and out == ""


@pytest.mark.parametrize("argv", [["--version"], ["--help"]])
def test_info_flags(capsys, argv):
    assert main(argv) == EXIT_OK
