import copy
import json

import pytest

from oblivion.authsig import auth_keygen
from oblivion.cli import bundled_scenarios
from oblivion.errors import ScenarioError
from oblivion.fhe import encrypt_bits
from oblivion.simnet import DROPPED, Bus, PlainBits, Transcript, scan, state_digest
from oblivion.simnet.adversary import AdversaryConfig, leakage_verdict
from oblivion.simnet.leakage import LeakageReport
from oblivion.simnet.scenario import load_scenario, run_scenario


@pytest.fixture(scope="module")
def bundled():
    return bundled_scenarios()


def base_spec(bundled):
    return load_scenario(bundled["empty"])


class TestBus:
    def test_sequence_and_history(self):
        bus = Bus()
        assert bus.send("a", "b", "OpRequest", b"one") == b"one"
        assert bus.send("b", "a", "OpResponse", b"two") == b"two"
        envs = bus.transcript.envelopes()
        assert [e["seq"] for e in envs] == [0, 1]
        assert [e["delivery_status"] for e in envs] == ["delivered", "delivered"]
        assert len(bus.history) == 2

    def test_tap_drop(self):
        bus = Bus()
        bus.taps.append(lambda s, r, v, d: (d, DROPPED))
        assert bus.send("a", "b", "OpRequest", b"x") is None
        assert bus.history == []
        assert bus.transcript.envelopes()[0]["delivery_status"] == DROPPED

    def test_jsonl_is_canonical(self):
        t = Transcript()
        t.step("alice", "encrypt", bits=3)
        t.note(action="x", index=0)
        lines = t.to_jsonl().splitlines()
        assert json.loads(lines[0]) == {"seq": 0, "kind": "step", "actor": "alice", "step": "encrypt", "bits": 3}
        assert lines[0] == json.dumps(json.loads(lines[0]), sort_keys=True, separators=(",", ":"))
        assert len(t.digest()) == 64


class TestLeakage:
    def test_public_only(self, small_keys, alice_auth):
        state = {"cts": encrypt_bits(small_keys.public, [1, 0], 0), "pk": small_keys.public, "who": alice_auth.public}
        report = scan(state)
        assert report.clean
        assert report.counts["ciphertext"] == 2
        assert leakage_verdict(report) == "ciphertext-only"

    @pytest.mark.parametrize("bad,label", [
        (lambda k, a: k.secret, "eval_secret_key"),
        (lambda k, a: k, "eval_secret_key"),
        (lambda k, a: a, "auth_secret_key"),
        (lambda k, a: PlainBits([1, 0]), "plaintext"),
    ])
    def test_violations(self, small_keys, alice_auth, bad, label):
        report = scan({"nested": [{"x": bad(small_keys, alice_auth)}]})
        assert not report.clean
        assert report.violations[0][1] == label
        assert "nested" in report.violations[0][0]
        assert leakage_verdict(report) == "leak"

    def test_plainbits_is_a_tuple(self):
        assert PlainBits([1, 0, 1]) == (1, 0, 1)

    def test_digest_tracks_ciphertexts(self, small_keys):
        a = {"c": encrypt_bits(small_keys.public, [1], 1)}
        b = {"c": encrypt_bits(small_keys.public, [1], 2)}
        assert state_digest(a) == state_digest(copy.deepcopy(a))
        assert state_digest(a) != state_digest(b)

    def test_disabled(self):
        assert leakage_verdict(LeakageReport(enabled=False)) == "no-access"

    def test_cycles(self):
        x = []
        x.append(x)
        assert scan(x).clean


class TestAdversaryConfig:
    def test_unknown_capability(self):
        with pytest.raises(ScenarioError):
            AdversaryConfig(frozenset({"teleport"}))

    def test_steal_needs_victim(self):
        with pytest.raises(ScenarioError):
            AdversaryConfig(frozenset({"steal_auth_sk"}))
        with pytest.raises(ScenarioError):
            AdversaryConfig(frozenset(), "bob")


class TestScenario:
    def test_empty_script(self, bundled):
        result = run_scenario(bundled["empty"])
        assert result.passed and result.steps == []
        assert result.transcript.entries == []

    def test_unknown_principal(self, bundled):
        spec = base_spec(bundled)
        spec["script"] = [{"action": "upload", "user": "carol", "data": "x"}]
        with pytest.raises(ScenarioError):
            run_scenario(spec)

    @pytest.mark.parametrize("mutate", [
        lambda s: s.update(protocol="telepathy"),
        lambda s: s.update(backend="quantum"),
        lambda s: s["principals"].append({"id": "alice", "auth_seed": 1}),
        lambda s: s["principals"][1].update(admin=True),
        lambda s: s.update(script=[{"action": "dance"}]),
        lambda s: s.update(functions=[{"id": 1, "builder": "adder", "width": 0}]),
        lambda s: s.update(data=[{"name": "x", "owner": "zed", "bits": [1]}]),
    ])
    def test_setup_errors(self, bundled, mutate):
        spec = base_spec(bundled)
        mutate(spec)
        with pytest.raises(ScenarioError):
            run_scenario(spec)

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ScenarioError):
            run_scenario(p)

    def test_failed_expectation_is_reported(self, bundled):
        spec = load_scenario(bundled["mssp_happy"])
        spec["script"][-1]["expect"] = "NotAdministrator"
        result = run_scenario(spec, backend="clear")
        assert not result.passed
        assert result.steps[-1].line().startswith("FAIL")
        assert "(expected NotAdministrator)" in result.steps[-1].line()

    def test_transcript_has_action_markers(self, bundled):
        result = run_scenario(bundled["mssp_happy"], backend="clear")
        notes = [e for e in result.transcript.entries if e["kind"] == "action"]
        assert len(notes) == 2 * len(result.steps)
        assert {n["phase"] for n in notes} == {"begin", "end"}

    def test_deterministic(self, bundled, tmp_path):
        a = run_scenario(bundled["attack_replay"])
        b = run_scenario(bundled["attack_replay"])
        assert a.transcript.to_jsonl() == b.transcript.to_jsonl()
        a.write(tmp_path / "a")
        b.write(tmp_path / "b")
        for name in ("transcript.jsonl", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_server_never_sees_secrets(self, bundled):
        for name in ("mcsp_happy", "lifecycle_reencrypt_oracle"):
            result = run_scenario(bundled[name])
            assert scan(result.server.cloud).clean
            assert all(
                not isinstance(v, type(auth_keygen(1))) for v in vars(result.server.cloud).values()
            )
