"""Protocol messages and their canonical wire form.

Wire layout: one version byte, then either a plain message envelope or a
signed envelope whose payload is ``version || message envelope``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from oblivion.abac import EncryptedAttribute, EncryptedPRB, dump_encrypted_prb, load_encrypted_prb
from oblivion.authsig import (
    SIGNED_TAG,
    AuthKeyPair,
    AuthPublicKey,
    SignedMessage,
    decode_envelope,
    decode_signed,
    encode_envelope,
    encode_signed,
    sign_message,
)
from oblivion.errors import EncodingError, OblivionError
from oblivion.fhe import Ciphertext, EvalPublicKey
from oblivion.fhe.io import dump_ciphertexts, dump_public_key, load_ciphertexts, load_key

VERSION = 1

UPLOAD_DATA = "UploadData"
OP_REQUEST = "OpRequest"
OP_RESPONSE = "OpResponse"
PRB_UPLOAD = "PrbUpload"
PRB_UPDATE = "PrbUpdate"
REKEY_ANNOUNCE = "RekeyAnnounce"
REENCRYPT_REQUEST = "ReencryptRequest"

TAGS = {
    UPLOAD_DATA: 1,
    OP_REQUEST: 2,
    OP_RESPONSE: 3,
    PRB_UPLOAD: 4,
    PRB_UPDATE: 5,
    REKEY_ANNOUNCE: 6,
    REENCRYPT_REQUEST: 7,
}
VARIANTS = {v: k for k, v in TAGS.items()}

FIELDS = {
    UPLOAD_DATA: ("request_id", "sender", "replace_handle", "blob"),
    OP_REQUEST: ("request_id", "sender", "protocol", "func_id", "inputs", "handles", "attrs"),
    OP_RESPONSE: ("request_id", "sender", "status", "detail", "outputs"),
    PRB_UPLOAD: ("request_id", "sender", "prb"),
    PRB_UPDATE: ("request_id", "sender", "prb"),
    REKEY_ANNOUNCE: ("request_id", "sender", "kind", "principal", "key"),
    REENCRYPT_REQUEST: ("request_id", "sender", "strategy", "key", "secret_bits"),
}

PROTOCOLS = ("basic", "mssp", "mcsp")
STATUS_OK = "ok"


@dataclass(frozen=True)
class Message:
    variant: str
    fields: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in FIELDS:
            raise EncodingError(f"unknown message variant {self.variant!r}")
        want = set(FIELDS[self.variant])
        have = set(self.fields)
        if want != have:
            missing, extra = sorted(want - have), sorted(have - want)
            raise EncodingError(f"{self.variant}: missing {missing}, unexpected {extra}")
        if self.variant == OP_REQUEST:
            proto = self.fields["protocol"]
            if proto not in PROTOCOLS:
                raise EncodingError(f"unknown protocol {proto!r}")
            # attributes travel only in the constrained protocol
            if proto != "mcsp" and self.fields["attrs"]:
                raise EncodingError(f"{proto} requests carry no attributes")

    def __getitem__(self, key: str):
        return self.fields[key]

    @property
    def request_id(self) -> str:
        return self.fields["request_id"]

    @property
    def sender(self) -> str:
        return self.fields["sender"]


# --- field codecs -----------------------------------------------------------

def _str(v: str) -> bytes:
    return str(v).encode()


def _unstr(b: bytes, pk) -> str:
    try:
        return b.decode()
    except UnicodeDecodeError:
        raise EncodingError("text field is not UTF-8") from None


def _int(v: int) -> bytes:
    return str(int(v)).encode()


def _unint(b: bytes, pk) -> int:
    try:
        return int(b.decode())
    except (UnicodeDecodeError, ValueError):
        raise EncodingError(f"bad integer field {b[:20]!r}") from None


def _cts(v) -> bytes:
    return dump_ciphertexts(list(v)).encode()


def _uncts(b: bytes, pk) -> tuple[Ciphertext, ...]:
    try:
        return tuple(load_ciphertexts(b.decode(), pk, "<wire>"))
    except (UnicodeDecodeError, OblivionError) as exc:
        raise EncodingError(f"bad ciphertext field: {exc}") from None


def _ints(v) -> bytes:
    return ",".join(str(int(x)) for x in v).encode()


def _unints(b: bytes, pk) -> tuple[int, ...]:
    if not b:
        return ()
    try:
        return tuple(int(x) for x in b.decode().split(","))
    except (UnicodeDecodeError, ValueError):
        raise EncodingError("bad integer list") from None


def _attrs(v) -> bytes:
    return encode_envelope(0, [
        encode_envelope(0, [a.name.encode(), a.category.encode(), _cts(a.ciphertexts)]) for a in v
    ])


def _unattrs(b: bytes, pk) -> tuple[EncryptedAttribute, ...]:
    _, items = decode_envelope(b)
    out = []
    for item in items:
        _, parts = decode_envelope(item)
        if len(parts) != 3:
            raise EncodingError("attribute entry needs name, category and ciphertexts")
        out.append(EncryptedAttribute(_unstr(parts[0], pk), _uncts(parts[2], pk), _unstr(parts[1], pk)))
    return tuple(out)


def _prb(v: EncryptedPRB) -> bytes:
    return dump_encrypted_prb(v).encode()


def _unprb(b: bytes, pk) -> EncryptedPRB:
    try:
        return load_encrypted_prb(b.decode(), pk, "<wire>")
    except (UnicodeDecodeError, OblivionError) as exc:
        raise EncodingError(f"bad PRB field: {exc}") from None


def _key(v) -> bytes:
    if isinstance(v, AuthPublicKey):
        return b"A" + v.to_bytes()
    if isinstance(v, EvalPublicKey):
        return b"E" + dump_public_key(v).encode()
    raise EncodingError(f"cannot encode key of type {type(v).__name__}")


def _unkey(b: bytes, pk):
    if b[:1] == b"A":
        return AuthPublicKey.from_bytes(b[1:])
    if b[:1] == b"E":
        try:
            key = load_key(b[1:].decode(), "<wire>")
        except (UnicodeDecodeError, OblivionError) as exc:
            raise EncodingError(f"bad eval key: {exc}") from None
        if not isinstance(key, EvalPublicKey):
            raise EncodingError("only public eval keys may travel on the wire")
        return key
    raise EncodingError("unknown key kind")


CODECS = {
    "request_id": (_str, _unstr),
    "sender": (_str, _unstr),
    "protocol": (_str, _unstr),
    "status": (_str, _unstr),
    "detail": (_str, _unstr),
    "kind": (_str, _unstr),
    "principal": (_str, _unstr),
    "strategy": (_str, _unstr),
    "replace_handle": (_int, _unint),
    "func_id": (_int, _unint),
    "blob": (_cts, _uncts),
    "inputs": (_cts, _uncts),
    "outputs": (_cts, _uncts),
    "secret_bits": (_cts, _uncts),
    "handles": (_ints, _unints),
    "attrs": (_attrs, _unattrs),
    "prb": (_prb, _unprb),
    "key": (_key, _unkey),
}

# decoding ciphertexts needs the reduction modulus; keys carried in a message
# are decoded first so re-encryption payloads can use the new key
_FIRST = ("key",)


def encode_message(msg: Message) -> bytes:
    fields = [CODECS[name][0](msg.fields[name]) for name in FIELDS[msg.variant]]
    return bytes([VERSION]) + encode_envelope(TAGS[msg.variant], fields)


def decode_message(data: bytes, pk: EvalPublicKey | None = None) -> Message:
    if not data or data[0] != VERSION:
        raise EncodingError(f"unsupported protocol version byte {data[:1]!r}")
    tag, raw = decode_envelope(data[1:])
    variant = VARIANTS.get(tag)
    if variant is None:
        raise EncodingError(f"unknown message tag {tag}")
    names = FIELDS[variant]
    if len(raw) != len(names):
        raise EncodingError(f"{variant}: expected {len(names)} fields, got {len(raw)}")
    by_name = dict(zip(names, raw))
    out: dict[str, Any] = {}
    for name in sorted(names, key=lambda n: n not in _FIRST):
        key_pk = out.get("key") if isinstance(out.get("key"), EvalPublicKey) else pk
        out[name] = CODECS[name][1](by_name[name], key_pk if name == "secret_bits" else pk)
    return Message(variant, {n: out[n] for n in names})


def to_wire(msg: Message, signer: AuthKeyPair | None = None) -> bytes:
    body = encode_message(msg)
    if signer is None:
        return body
    return bytes([VERSION]) + encode_signed(sign_message(signer, body))


def from_wire(data: bytes, pk: EvalPublicKey | None = None) -> tuple[Message, SignedMessage | None]:
    """Decode wire bytes; the signature, if any, is returned unverified."""
    if len(data) < 2 or data[0] != VERSION:
        raise EncodingError("unsupported protocol version")
    if data[1] == SIGNED_TAG:
        signed = decode_signed(data[1:])
        msg = decode_message(signed.payload, pk)
        if msg.sender != signed.signer:
            raise EncodingError("message sender differs from the signer")
        return msg, signed
    return decode_message(data, pk), None
