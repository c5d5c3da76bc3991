"""Authentication keys, deterministic Schnorr signatures, canonical envelopes.

The group is a 1024-bit prime field with a 256-bit prime-order subgroup,
fixed below.  Nonces are derived from the secret key and message with
HMAC-SHA256, so signatures are deterministic for a given (key, message).
These sizes are toy sizes; swap in a production scheme behind
``Signer``/``verify`` if it matters.

Envelope encoding (all integers big-endian)::

    type_tag (1 byte) || count (2 bytes) || [len (4 bytes) || field]*
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass
from typing import Sequence

from oblivion.errors import EncodingError, ParseError

GROUP_P = int(
    "8fe64f65df6fef263396a8e1696ae2ef3bae89dc8ce46caf2370a6fce997e2e864f4a761e0515f17"
    "bafbae7fc2547ed6e598e5ddd3b77f2d322fea3e84aa466b0442daa03905777960d796d04ac2cc6b"
    "408f1cae26027e5cee23a079c48a8fa6e7e375d4839d6b281bc0732ff18e6a0c23a055babbf78397"
    "3bb3d64bca1a4cf5",
    16,
)
GROUP_Q = int("956d8e90cb021d444873640f5744e43f56840f843c523aa1866434f42c7eaf25", 16)
GROUP_G = int(
    "7136d4bc38e45760f7d73b506bec53b274128565973f3c166a2dbe7ae63f234f7ecef5e9e0edb07d"
    "5b5ae8b975cadc4be9bbe77d4a99f89ae6c78dc7aaeaf813bde90f9d90b8c245f7578b206b92cbd4"
    "1a5855e896d244ba09284194ab5adcab3e849ec4938d76476415943c59513db6d8f184fe7f198eb3"
    "acb6a82fef6b8127",
    16,
)
_PBYTES = (GROUP_P.bit_length() + 7) // 8
_QBYTES = 32
SIGNATURE_BYTES = 2 * _QBYTES


@dataclass(frozen=True)
class AuthPublicKey:
    y: int

    def to_bytes(self) -> bytes:
        return self.y.to_bytes(_PBYTES, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuthPublicKey":
        return cls(int.from_bytes(data, "big"))

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()[:16]


@dataclass(frozen=True, repr=False)
class AuthSecretKey:
    x: int
    public: AuthPublicKey

    def __repr__(self):
        return f"AuthSecretKey(public={self.public.fingerprint})"


@dataclass(frozen=True)
class AuthKeyPair:
    public: AuthPublicKey
    secret: AuthSecretKey
    principal_id: str


@dataclass(frozen=True)
class SignedMessage:
    payload: bytes
    signer: str
    signature: bytes


def _h(*parts: bytes) -> int:
    d = hashlib.sha256()
    for p in parts:
        d.update(struct.pack(">I", len(p)))
        d.update(p)
    return int.from_bytes(d.digest(), "big")


def auth_keygen(seed: int, principal_id: str = "") -> AuthKeyPair:
    """Deterministic key pair; distinct seeds give distinct keys."""
    x = _h(b"oblivion-auth-keygen", str(int(seed)).encode()) % (GROUP_Q - 1) + 1
    pub = AuthPublicKey(pow(GROUP_G, x, GROUP_P))
    return AuthKeyPair(pub, AuthSecretKey(x, pub), principal_id)


def sign(sk: AuthSecretKey, m: bytes) -> bytes:
    xb = sk.x.to_bytes(_QBYTES, "big")
    k = int.from_bytes(hmac.new(xb, m, hashlib.sha256).digest(), "big") % (GROUP_Q - 1) + 1
    r = pow(GROUP_G, k, GROUP_P)
    e = _h(r.to_bytes(_PBYTES, "big"), sk.public.to_bytes(), m) % GROUP_Q
    s = (k + e * sk.x) % GROUP_Q
    return e.to_bytes(_QBYTES, "big") + s.to_bytes(_QBYTES, "big")


def verify(pk: AuthPublicKey, m: bytes, sig: bytes) -> bool:
    if len(sig) != SIGNATURE_BYTES or not 1 < pk.y < GROUP_P:
        return False
    e = int.from_bytes(sig[:_QBYTES], "big")
    s = int.from_bytes(sig[_QBYTES:], "big")
    if not (0 <= e < GROUP_Q and 0 <= s < GROUP_Q):
        return False
    r = pow(GROUP_G, s, GROUP_P) * pow(pk.y, GROUP_Q - e, GROUP_P) % GROUP_P
    return _h(r.to_bytes(_PBYTES, "big"), pk.to_bytes(), m) % GROUP_Q == e


def sign_message(kp: AuthKeyPair, payload: bytes) -> SignedMessage:
    return SignedMessage(payload, kp.principal_id, sign(kp.secret, payload))


def verify_message(pk: AuthPublicKey, msg: SignedMessage) -> bool:
    return verify(pk, msg.payload, msg.signature)


# --- canonical envelope ---------------------------------------------------

def encode_envelope(type_tag: int, fields: Sequence[bytes]) -> bytes:
    if not 0 <= type_tag < 256:
        raise EncodingError(f"type tag {type_tag} does not fit in one byte")
    if len(fields) > 0xFFFF:
        raise EncodingError("too many fields")
    out = [bytes([type_tag]), struct.pack(">H", len(fields))]
    for f in fields:
        out.append(struct.pack(">I", len(f)))
        out.append(bytes(f))
    return b"".join(out)


def decode_envelope(data: bytes) -> tuple[int, list[bytes]]:
    if len(data) < 3:
        raise EncodingError("envelope shorter than its header")
    tag = data[0]
    (count,) = struct.unpack(">H", data[1:3])
    pos, fields = 3, []
    for i in range(count):
        if pos + 4 > len(data):
            raise EncodingError(f"field {i}: truncated length")
        (n,) = struct.unpack(">I", data[pos : pos + 4])
        pos += 4
        if pos + n > len(data):
            raise EncodingError(f"field {i}: truncated body")
        fields.append(data[pos : pos + n])
        pos += n
    if pos != len(data):
        raise EncodingError("trailing bytes after envelope")
    return tag, fields


SIGNED_TAG = 0xF0


def encode_signed(msg: SignedMessage) -> bytes:
    return encode_envelope(SIGNED_TAG, [msg.payload, msg.signer.encode(), msg.signature])


def decode_signed(data: bytes) -> SignedMessage:
    tag, fields = decode_envelope(data)
    if tag != SIGNED_TAG or len(fields) != 3:
        raise EncodingError("not a signed envelope")
    try:
        signer = fields[1].decode()
    except UnicodeDecodeError:
        raise EncodingError("signer id is not UTF-8") from None
    return SignedMessage(fields[0], signer, fields[2])


def dump_auth_key(kp: AuthKeyPair, part: str = "public") -> str:
    head = f"OBLIVION-AUTHKEY v1; principal={kp.principal_id}; part={part}"
    value = kp.public.y if part == "public" else kp.secret.x
    return f"{head}\n{value:x}\n"


def load_auth_key(text: str) -> AuthKeyPair | AuthPublicKey:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2 or not lines[0].startswith("OBLIVION-AUTHKEY v1"):
        raise ParseError("expected an OBLIVION-AUTHKEY v1 file with one value line")
    attrs = dict(p.strip().partition("=")[::2] for p in lines[0].split(";")[1:])
    try:
        value = int(lines[1], 16)
    except ValueError:
        raise ParseError("key value is not hex", 2) from None
    if attrs.get("part") == "secret":
        pub = AuthPublicKey(pow(GROUP_G, value, GROUP_P))
        return AuthKeyPair(pub, AuthSecretKey(value, pub), attrs.get("principal", ""))
    return AuthPublicKey(value)
