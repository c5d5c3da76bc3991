import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import isprime

from oblivion.authsig import (
    GROUP_G,
    GROUP_P,
    GROUP_Q,
    SIGNATURE_BYTES,
    SIGNED_TAG,
    SignedMessage,
    auth_keygen,
    decode_envelope,
    decode_signed,
    dump_auth_key,
    encode_envelope,
    encode_signed,
    load_auth_key,
    sign,
    sign_message,
    verify,
    verify_message,
)
from oblivion.errors import EncodingError, ParseError


class TestGroup:
    def test_primes(self):
        assert isprime(GROUP_P)
        assert isprime(GROUP_Q)
        assert GROUP_P.bit_length() == 1024
        assert GROUP_Q.bit_length() == 256

    def test_subgroup(self):
        assert (GROUP_P - 1) % GROUP_Q == 0
        assert GROUP_G != 1
        assert pow(GROUP_G, GROUP_Q, GROUP_P) == 1


class TestSignatures:
    def test_sign_verify(self, alice_auth):
        sig = sign(alice_auth.secret, b"hello")
        assert len(sig) == SIGNATURE_BYTES
        assert verify(alice_auth.public, b"hello", sig)
        assert not verify(alice_auth.public, b"hellp", sig)

    def test_wrong_key(self, alice_auth, bob_auth):
        assert not verify(bob_auth.public, b"m", sign(alice_auth.secret, b"m"))

    def test_deterministic(self, alice_auth):
        assert sign(alice_auth.secret, b"x") == sign(alice_auth.secret, b"x")
        assert sign(alice_auth.secret, b"x") != sign(alice_auth.secret, b"y")

    def test_keys_distinct(self):
        assert auth_keygen(1).public != auth_keygen(2).public
        assert auth_keygen(1).public == auth_keygen(1).public

    @settings(max_examples=20, deadline=None)
    @given(st.binary(max_size=64), st.integers(0, SIGNATURE_BYTES - 1), st.integers(1, 255))
    def test_any_flipped_byte_fails(self, alice_auth, msg, pos, mask):
        sig = bytearray(sign(alice_auth.secret, msg))
        sig[pos] ^= mask
        assert not verify(alice_auth.public, msg, bytes(sig))

    def test_malformed_signature(self, alice_auth):
        assert not verify(alice_auth.public, b"m", b"short")
        assert not verify(alice_auth.public, b"m", b"\xff" * SIGNATURE_BYTES)

    def test_secret_repr_hidden(self, alice_auth):
        assert format(alice_auth.secret.x, "x") not in repr(alice_auth.secret)


class TestEnvelope:
    @given(st.integers(0, 255), st.lists(st.binary(max_size=40), max_size=8))
    def test_round_trip(self, tag, fields):
        assert decode_envelope(encode_envelope(tag, fields)) == (tag, fields)

    def test_layout(self):
        assert encode_envelope(7, [b"ab", b""]) == b"\x07\x00\x02\x00\x00\x00\x02ab\x00\x00\x00\x00"

    @pytest.mark.parametrize("data", [b"", b"\x01\x00", b"\x01\x00\x01\x00\x00\x00\x05ab", b"\x01\x00\x00x"])
    def test_malformed(self, data):
        with pytest.raises(EncodingError):
            decode_envelope(data)

    def test_bad_tag(self):
        with pytest.raises(EncodingError):
            encode_envelope(256, [])

    def test_signed_round_trip(self, alice_auth):
        sm = sign_message(alice_auth, b"payload")
        wire = encode_signed(sm)
        assert wire[0] == SIGNED_TAG
        back = decode_signed(wire)
        assert back == sm and back.signer == "alice"
        assert verify_message(alice_auth.public, back)

    def test_signed_rejects_other_tags(self):
        with pytest.raises(EncodingError):
            decode_signed(encode_envelope(1, [b"a", b"b", b"c"]))

    def test_signer_swap_detected(self, alice_auth, bob_auth):
        sm = sign_message(alice_auth, b"p")
        forged = SignedMessage(sm.payload, "bob", sm.signature)
        assert not verify_message(bob_auth.public, forged)


class TestKeyFiles:
    def test_round_trip(self, alice_auth):
        assert load_auth_key(dump_auth_key(alice_auth, "public")) == alice_auth.public
        pair = load_auth_key(dump_auth_key(alice_auth, "secret"))
        assert pair.public == alice_auth.public and pair.principal_id == "alice"

    def test_garbage(self):
        with pytest.raises(ParseError):
            load_auth_key("nonsense")
