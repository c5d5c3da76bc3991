import random

import pytest

from oblivion.abac import SchemaEntry, encrypt_prb, random_prb
from oblivion.authsig import SignedMessage, auth_keygen, sign_message
from oblivion.circuit import build_adder, build_equality
from oblivion.cloudserver import CloudServer, FunctionRegistry, ResourceStore
from oblivion.errors import (
    DuplicateFuncId,
    KeyMismatch,
    NotAdministrator,
    SignatureRejected,
    UnknownFunc,
    UnknownHandle,
)
from oblivion.fhe import SMALL_PARAMS, decrypt_bits, encrypt_bits, keygen
from oblivion.simnet import scan

SCHEMA = (SchemaEntry("subject.role", 2, "subject"),)


class TestResourceStore:
    def test_store_fetch(self, small_keys):
        store = ResourceStore()
        blob = encrypt_bits(small_keys.public, [1, 0, 1], 0)
        h1 = store.store("alice", blob)
        h2 = store.store("bob", blob[:1])
        assert h1 != h2
        assert store.fetch(h1) == tuple(blob)
        assert store.record(h2).owner == "bob"
        assert store.handles() == [h1, h2] and len(store) == 2

    def test_unknown_handle(self):
        with pytest.raises(UnknownHandle):
            ResourceStore().fetch(42)

    def test_mixed_keys(self, small_keys, clear_keys):
        mixed = encrypt_bits(small_keys.public, [1], 0) + encrypt_bits(clear_keys.public, [1], 0)
        with pytest.raises(KeyMismatch):
            ResourceStore().store("alice", mixed)

    def test_replace_keeps_owner(self, small_keys, clear_keys):
        store = ResourceStore()
        h = store.store("alice", encrypt_bits(small_keys.public, [1], 0))
        store.replace(h, encrypt_bits(clear_keys.public, [0], 0))
        r = store.record(h)
        assert r.owner == "alice" and r.key_fingerprint == clear_keys.fingerprint

    def test_save_load(self, tmp_path, small_keys):
        store = ResourceStore()
        store.store("alice", encrypt_bits(small_keys.public, [1, 1, 0], 1))
        store.store("bob", encrypt_bits(small_keys.public, [0, 1], 2))
        store.save(tmp_path)
        back = ResourceStore.load(tmp_path, small_keys.public)
        assert back.handles() == store.handles()
        for h in store.handles():
            assert decrypt_bits(small_keys.secret, back.fetch(h)) == decrypt_bits(small_keys.secret, store.fetch(h))
        # handles keep counting after a reload
        assert back.store("x", []) == 3
        assert (tmp_path / "index.tsv").read_text().startswith("handle\towner")


class TestFunctionRegistry:
    def test_register_lookup(self):
        reg = FunctionRegistry()
        reg.register_func(1, build_adder(2))
        assert reg.lookup_func(1) == build_adder(2)
        with pytest.raises(DuplicateFuncId):
            reg.register_func(1, build_equality(2))
        with pytest.raises(UnknownFunc):
            reg.lookup_func(9)
        with pytest.raises(TypeError):
            reg.register_func(2, "not a circuit")


class TestPrbUpdate:
    @pytest.fixture
    def setup(self, small_keys, alice_auth, bob_auth):
        cloud = CloudServer(small_keys.public, "alice", {"alice": alice_auth.public, "bob": bob_auth.public})
        eprb = encrypt_prb(small_keys.public, random_prb(random.Random(1), SCHEMA, 2, 2), 0)
        return cloud, eprb

    def test_admin_update_audited(self, setup, alice_auth):
        cloud, eprb = setup
        cloud.update_prb("alice", sign_message(alice_auth, b"v1"), eprb)
        cloud.update_prb("alice", sign_message(alice_auth, b"v2"), eprb)
        assert cloud.prb is eprb
        assert len(cloud.prb_audit) == 2

    def test_partner_rejected(self, setup, bob_auth):
        cloud, eprb = setup
        with pytest.raises(NotAdministrator):
            cloud.update_prb("bob", sign_message(bob_auth, b"v"), eprb)
        assert cloud.prb is None and not cloud.prb_audit

    def test_claiming_admin_with_other_signature(self, setup, bob_auth):
        cloud, eprb = setup
        with pytest.raises(SignatureRejected):
            cloud.update_prb("alice", sign_message(bob_auth, b"v"), eprb)
        forged = SignedMessage(b"v", "alice", sign_message(bob_auth, b"v").signature)
        with pytest.raises(SignatureRejected):
            cloud.update_prb("alice", forged, eprb)

    def test_unknown_signer(self, setup):
        cloud, eprb = setup
        with pytest.raises(SignatureRejected):
            cloud.update_prb("eve", sign_message(auth_keygen(5, "eve"), b"v"), eprb)

    def test_wrong_eval_key(self, setup, alice_auth):
        cloud, _ = setup
        other = keygen(SMALL_PARAMS, 9, "toy")
        eprb = encrypt_prb(other.public, random_prb(random.Random(1), SCHEMA, 2, 1), 0)
        with pytest.raises(KeyMismatch):
            cloud.update_prb("alice", sign_message(alice_auth, b"v"), eprb)

    def test_state_holds_no_secrets(self, setup, alice_auth, small_keys):
        cloud, eprb = setup
        cloud.resources.store("alice", encrypt_bits(small_keys.public, [1, 0], 0))
        cloud.update_prb("alice", sign_message(alice_auth, b"v"), eprb)
        report = scan(cloud)
        assert report.clean, report.summary()
        assert "ciphertext" in report.counts
