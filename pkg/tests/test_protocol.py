import pytest

from oblivion.abac import AttributeValue, PolicyRule, PolicyRuleBase, SchemaEntry, fingerprint_subject
from oblivion.authsig import auth_keygen
from oblivion.circuit import build_adder, build_equality, build_mask, eval_plain
from oblivion.cloudserver import CloudServer
from oblivion.errors import (
    EncodingError,
    NotAdministrator,
    ProtocolMismatch,
    ReplayRejected,
    ServerSignatureInvalid,
    SignatureRejected,
    UnknownFunc,
    UnknownHandle,
)
from oblivion.fhe import decrypt_bits, encrypt_bits, keygen
from oblivion.protocol import (
    OP_REQUEST,
    OP_RESPONSE,
    PRB_UPLOAD,
    DeniedSentinel,
    Message,
    ServerAgent,
    UserAgent,
    basic_run,
    basic_upload,
    decode_message,
    distribute_eval_keys,
    encode_message,
    error_class,
    from_wire,
    mcsp_prb_update,
    mcsp_prb_upload,
    mcsp_run,
    mssp_run,
    mssp_upload,
    reencrypt_data,
    revoke_user,
    rotate_auth_key,
    to_wire,
)
from oblivion.simnet import Bus, Transcript, scan


def make_world(keys, protocol="mssp", with_prb=False):
    alice = UserAgent("alice", auth_keygen(101, "alice"), is_admin=True, seed=1)
    bob = UserAgent("bob", auth_keygen(202, "bob"), seed=2)
    users = [alice] if protocol == "basic" else [alice, bob]
    distribute_eval_keys(keys, users)
    sally = auth_keygen(909, "sally")
    cloud = CloudServer(keys.public, "alice")
    for u in (alice, bob):
        u.server_auth = sally.public
    for u in users:
        cloud.principals[u.principal_id] = u.auth.public
    alice.directory = {u.principal_id: u.auth.public for u in (alice, bob)}
    server = ServerAgent("sally", sally, cloud, protocol, protocol != "basic")
    cloud.functions.register_func(1, build_adder(2))
    cloud.functions.register_func(2, build_equality(4))
    cloud.functions.register_func(3, build_mask(2))
    if with_prb:
        schema = (SchemaEntry("subject.id", 8, "subject"), SchemaEntry("subject.role", 2, "subject"))
        bob_id = fingerprint_subject(bob.auth.public, 8).bits
        alice.prb = PolicyRuleBase(schema, 2, (
            PolicyRule((("subject.id", bob_id),), frozenset({1})),
            PolicyRule((("subject.role", (1, 1)),)),
        ), identity="subject.id")
    return Bus(Transcript()), alice, bob, server


def role(v):
    return AttributeValue.from_int("subject.role", 2, v)


class TestMessages:
    def test_round_trip(self, small_keys):
        cts = tuple(encrypt_bits(small_keys.public, [1, 0], 0))
        msg = Message(OP_REQUEST, {
            "request_id": "alice-1", "sender": "alice", "protocol": "mssp",
            "func_id": 3, "inputs": cts, "handles": (4, 5), "attrs": (),
        })
        back = decode_message(encode_message(msg), small_keys.public)
        assert back.variant == msg.variant
        assert {k: v for k, v in back.fields.items() if k != "inputs"} == {
            k: v for k, v in msg.fields.items() if k != "inputs"
        }
        # only the noise budget travels, so the restored bound may only grow
        for a, b in zip(back["inputs"], cts):
            assert a.value == b.value and a.noise_bound >= b.noise_bound
        assert decrypt_bits(small_keys.secret, back["inputs"]) == [1, 0]

    def test_missing_field(self):
        with pytest.raises(EncodingError):
            Message(OP_RESPONSE, {"request_id": "x"})

    def test_attrs_outside_mcsp(self, clear_keys):
        from oblivion.abac import encrypt_attributes

        attrs = tuple(encrypt_attributes(clear_keys.public, [role(1)], 0))
        with pytest.raises(EncodingError):
            Message(OP_REQUEST, {
                "request_id": "r", "sender": "a", "protocol": "mssp", "func_id": 1,
                "inputs": (), "handles": (), "attrs": attrs,
            })

    def test_signed_wire(self, alice_auth, bob_auth):
        msg = Message(OP_RESPONSE, {"request_id": "r", "sender": "alice", "status": "ok", "detail": "", "outputs": ()})
        back, sm = from_wire(to_wire(msg, alice_auth))
        assert back == msg and sm.signer == "alice"
        with pytest.raises(EncodingError):
            from_wire(to_wire(msg, bob_auth))
        assert from_wire(to_wire(msg, None))[1] is None

    def test_garbage(self):
        with pytest.raises(EncodingError):
            from_wire(b"\x09junk")

    def test_error_class(self):
        assert error_class("NotAdministrator") is NotAdministrator
        assert error_class("no such thing").__name__ == "OblivionError"


class TestBasic:
    def test_happy(self, any_keys):
        bus, alice, _, server = make_world(any_keys, "basic")
        h = basic_upload(bus, alice, server, "x", [1, 1])
        assert basic_run(bus, alice, server, 1, [0, 1], [h]) == eval_plain(build_adder(2), [0, 1, 1, 1])

    def test_unknown_func_never_evaluates(self, clear_keys):
        bus, alice, _, server = make_world(clear_keys, "basic")
        with pytest.raises(UnknownFunc):
            basic_run(bus, alice, server, 9, [1])
        assert "evaluate" not in [s["step"] for s in bus.transcript.steps("sally")]


class TestMSSP:
    def test_cross_user(self, any_keys):
        bus, alice, bob, server = make_world(any_keys)
        hx = mssp_upload(bus, alice, server, "x", [1, 1])
        hy = mssp_upload(bus, bob, server, "y", [0, 1])
        assert mssp_run(bus, bob, server, 1, [0, 1], [hx]) == eval_plain(build_adder(2), [0, 1, 1, 1])
        assert mssp_run(bus, alice, server, 1, [1, 0], [hy]) == eval_plain(build_adder(2), [1, 0, 0, 1])

    def test_step_order(self, clear_keys):
        bus, alice, _, server = make_world(clear_keys)
        h = mssp_upload(bus, alice, server, "k", [1, 0, 1, 1])
        start = len(bus.transcript.steps("sally"))
        mssp_run(bus, alice, server, 2, [1, 0, 1, 1], [h])
        steps = [s["step"] for s in bus.transcript.steps("sally")[start:]]
        assert steps == ["receive", "verifySig", "evaluate", "sign"]
        client = [s["step"] for s in bus.transcript.steps("alice")]
        assert client[-4:] == ["encrypt", "send", "verifySig", "decrypt"]

    def test_unregistered_signer(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys)
        del server.cloud.principals["bob"]
        with pytest.raises(SignatureRejected):
            mssp_run(bus, bob, server, 3, [1, 0, 1, 0])

    def test_replay(self, clear_keys):
        bus, alice, _, server = make_world(clear_keys)
        mssp_run(bus, alice, server, 3, [1, 0, 1, 0])
        _, _, _, wire = bus.history[-2]
        reply = server.handle(wire, bus)
        msg, _ = from_wire(reply)
        assert msg["status"] == ReplayRejected.__name__

    def test_tampered_response(self, clear_keys):
        bus, alice, _, server = make_world(clear_keys)

        def flip(sender, receiver, variant, data):
            if variant == OP_RESPONSE:
                b = bytearray(data)
                b[-5] ^= 1
                return bytes(b), "tampered"

        bus.taps.append(flip)
        with pytest.raises(ServerSignatureInvalid):
            mssp_run(bus, alice, server, 3, [1, 0, 1, 0])

    def test_wrong_protocol(self, clear_keys):
        bus, alice, _, server = make_world(clear_keys)
        with pytest.raises(ProtocolMismatch):
            basic_run(bus, alice, server, 3, [1, 0, 1, 0], signed=True)

    def test_unknown_handle(self, clear_keys):
        bus, alice, _, server = make_world(clear_keys)
        with pytest.raises(UnknownHandle):
            mssp_run(bus, alice, server, 1, [0, 1], [77])

    def test_secrecy_after_every_message(self, small_keys):
        bus, alice, bob, server = make_world(small_keys)
        mssp_upload(bus, alice, server, "x", [1, 1])
        mssp_run(bus, bob, server, 3, [1, 0, 0, 1])
        report = scan(server.cloud)
        assert report.clean
        assert len([e for e in bus.transcript.entries if e["kind"] == "state"]) == 2


class TestMCSP:
    def test_prb_requires_admin(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        bob.prb = alice.prb
        with pytest.raises(NotAdministrator):
            mcsp_prb_upload(bus, bob, server)
        mcsp_prb_upload(bus, alice, server)
        assert len(server.cloud.prb_audit) == 1

    @pytest.mark.parametrize("keys_name", ["clear_keys", "toy_keys"])
    def test_grant_and_deny(self, request, keys_name):
        keys = request.getfixturevalue(keys_name)
        bus, alice, bob, server = make_world(keys, "mcsp", with_prb=True)
        mcsp_prb_upload(bus, alice, server)
        hx = mssp_upload(bus, alice, server, "x", [1, 1])
        want = eval_plain(build_adder(2), [0, 1, 1, 1])
        # bob: identity rule grants func 1 only
        assert mcsp_run(bus, bob, server, 1, [0, 1], [hx], [role(0)]) == want
        denied = mcsp_run(bus, bob, server, 3, [1, 0, 1, 0], (), [role(0)])
        assert isinstance(denied, DeniedSentinel) and not any(denied.bits) and denied.width == 2
        # alice: only the role rule applies
        assert mcsp_run(bus, alice, server, 1, [0, 1], [hx], [role(3)]) == want
        assert isinstance(mcsp_run(bus, alice, server, 1, [0, 1], [hx], [role(2)]), DeniedSentinel)

    def test_step_order(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        mcsp_prb_upload(bus, alice, server)
        start = len(bus.transcript.steps("sally"))
        mcsp_run(bus, bob, server, 3, [1, 0, 1, 0], (), [role(0)])
        steps = [s["step"] for s in bus.transcript.steps("sally")[start:]]
        assert steps == ["receive", "verifySig", "verifyAccess", "evaluate", "gateOutput", "sign"]

    def test_identity_cannot_be_claimed(self, clear_keys):
        # alice asserting bob's identity attribute is overridden by the signer's own
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        mcsp_prb_upload(bus, alice, server)
        fake = fingerprint_subject(bob.auth.public, 8)
        out = mcsp_run(bus, alice, server, 1, [0, 1, 1, 1], (), [role(0), fake])
        assert isinstance(out, DeniedSentinel)

    def test_no_prb(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        with pytest.raises(ProtocolMismatch):
            mcsp_run(bus, bob, server, 1, [0, 1, 1, 1], (), [role(0)])


class TestLifecycle:
    def test_rotation(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        mcsp_prb_upload(bus, alice, server)
        rotate_auth_key(bus, bob, alice, server, 303)
        assert mcsp_run(bus, bob, server, 1, [0, 1, 1, 1], (), [role(0)]) == eval_plain(build_adder(2), [0, 1, 1, 1])
        with pytest.raises(SignatureRejected):
            mcsp_run(bus, bob, server, 1, [0, 1, 1, 1], (), [role(0)], auth=bob.previous_auth)
        # the update keeps the rule count
        assert len(server.cloud.prb.rules) == 2 and len(server.cloud.prb_audit) == 2

    def test_rotation_by_partner_rejected(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        with pytest.raises(NotAdministrator):
            rotate_auth_key(bus, bob, bob, server, 303)

    def test_revocation(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        mcsp_prb_upload(bus, alice, server)
        revoke_user(bus, alice, server, "bob")
        out = mcsp_run(bus, bob, server, 1, [0, 1, 1, 1], (), [role(0)])
        assert isinstance(out, DeniedSentinel)
        # padded: the stored PRB still has two rule slots
        assert len(server.cloud.prb.rules) == 2
        assert len(alice.prb.rules) == 1
        before = len(server.cloud.prb_audit)
        revoke_user(bus, alice, server, "nobody")
        assert len(server.cloud.prb_audit) == before

    def test_oracle_reencryption(self, small_keys):
        from oblivion.fhe import SMALL_PARAMS

        bus, alice, bob, server = make_world(small_keys)
        hx = mssp_upload(bus, alice, server, "x", [1, 1])
        hy = mssp_upload(bus, bob, server, "y", [0, 1])
        new = keygen(SMALL_PARAMS, 44, "toy")
        assert reencrypt_data(bus, alice, server, "oracle_rotation", new, [bob]) == "oracle_rotation"
        assert server.cloud.eval_pk == new.public
        for h, bits in ((hx, [1, 1]), (hy, [0, 1])):
            assert decrypt_bits(new.secret, server.cloud.resources.fetch(h)) == bits
        assert mssp_run(bus, bob, server, 1, [0, 1], [hx]) == eval_plain(build_adder(2), [0, 1, 1, 1])

    def test_homomorphic_clear(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
        mcsp_prb_upload(bus, alice, server)
        hx = mssp_upload(bus, alice, server, "x", [1, 1])
        new = keygen(None, 55, "clear")
        reencrypt_data(bus, alice, server, "homomorphic_rotation", new, [bob])
        assert decrypt_bits(new.secret, server.cloud.resources.fetch(hx)) == [1, 1]
        assert server.cloud.prb.key_fingerprint == new.fingerprint
        assert mcsp_run(bus, bob, server, 1, [0, 1], [hx], [role(0)]) == eval_plain(build_adder(2), [0, 1, 1, 1])

    def test_homomorphic_toy_guarded(self, small_keys):
        from oblivion.errors import DepthExceeded
        from oblivion.fhe import SMALL_PARAMS

        bus, alice, bob, server = make_world(small_keys)
        mssp_upload(bus, alice, server, "x", [1, 1])
        new = keygen(SMALL_PARAMS, 56, "toy")
        with pytest.raises(DepthExceeded):
            reencrypt_data(bus, alice, server, "homomorphic_rotation", new, [bob])
        assert server.cloud.eval_pk == small_keys.public
        assert reencrypt_data(bus, alice, server, "homomorphic_rotation", new, [bob], fallback=True) == "oracle_rotation"

    def test_partner_cannot_reencrypt(self, clear_keys):
        bus, alice, bob, server = make_world(clear_keys)
        with pytest.raises(NotAdministrator):
            reencrypt_data(bus, bob, server, "oracle_rotation", keygen(None, 8, "clear"))


def test_prb_update_padding(clear_keys):
    bus, alice, bob, server = make_world(clear_keys, "mcsp", with_prb=True)
    mcsp_prb_upload(bus, alice, server)
    mcsp_prb_update(bus, alice, server, alice.prb.replace_rules(alice.prb.rules[:1]))
    assert len(server.cloud.prb.rules) == 2
    assert bus.history[-2][2] == "PrbUpdate"
    assert PRB_UPLOAD == "PrbUpload"
