"""Client-driven message flows of the three protocols and of key lifecycle operations.

Each flow encrypts on the client, sends one message per tabled exchange over
the bus, lets the server handle it, and decrypts the reply.  Every step is
logged to the bus transcript under the acting principal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from oblivion.abac import (
    AttributeValue,
    PolicyRuleBase,
    encrypt_attributes,
    encrypt_prb,
    fingerprint_subject,
)
from oblivion.authsig import AuthKeyPair, auth_keygen
from oblivion.errors import CryptoError, ProtocolRejection, ServerSignatureInvalid
from oblivion.fhe import (
    EvalKeyPair,
    check_key_switch,
    decrypt_bits,
    encrypt_bits,
    secret_key_bits,
)
from oblivion.protocol.agents import (
    HOMOMORPHIC_ROTATION,
    ORACLE_ROTATION,
    STRATEGIES,
    ServerAgent,
    UserAgent,
)
from oblivion.protocol.messages import (
    OP_REQUEST,
    OP_RESPONSE,
    PRB_UPDATE,
    PRB_UPLOAD,
    REENCRYPT_REQUEST,
    REKEY_ANNOUNCE,
    UPLOAD_DATA,
    Message,
    to_wire,
)
from oblivion.simnet.bus import Bus
from oblivion.simnet.leakage import PlainBits


@dataclass(frozen=True)
class DeniedSentinel:
    """What an unauthorized requester decrypts: all zeros, validity bit included."""

    bits: tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.bits) - 1


class Dropped(ProtocolRejection):
    pass


def exchange(
    bus: Bus,
    user: UserAgent,
    server: ServerAgent,
    msg: Message,
    signed: bool = True,
    auth: AuthKeyPair | None = None,
) -> Message:
    """Send one request, let the server handle it, and open the reply."""
    key = auth if auth is not None else user.auth
    wire = to_wire(msg, key if signed else None)
    bus.step(user.principal_id, "send", variant=msg.variant, request=msg.request_id)
    delivered = bus.send(user.principal_id, server.principal_id, msg.variant, wire)
    if delivered is None:
        raise Dropped(f"request {msg.request_id} was dropped")
    reply = server.handle(delivered, bus)
    back = bus.send(server.principal_id, user.principal_id, OP_RESPONSE, reply)
    try:
        resp = user.open_response(back, signed)
    except ServerSignatureInvalid:
        bus.step(user.principal_id, "verifySig", ok=False, request=msg.request_id)
        raise
    except ProtocolRejection as exc:
        bus.step(user.principal_id, "rejected", error=type(exc).__name__, request=msg.request_id)
        raise
    if signed:
        bus.step(user.principal_id, "verifySig", ok=True, request=msg.request_id)
    return resp


# --- data preparation -------------------------------------------------------

def upload(
    bus: Bus,
    user: UserAgent,
    server: ServerAgent,
    name: str,
    bits: Sequence[int],
    signed: bool = True,
) -> int:
    """Encrypt ``bits`` under the eval key and store them; returns the handle."""
    user.data[name] = PlainBits(bits)
    blob = tuple(user.encrypt(bits))
    bus.step(user.principal_id, "encrypt", bits=len(blob))
    msg = Message(UPLOAD_DATA, {
        "request_id": user.next_request_id(),
        "sender": user.principal_id,
        "replace_handle": 0,
        "blob": blob,
    })
    resp = exchange(bus, user, server, msg, signed)
    handle = int(resp["detail"])
    user.handles[name] = handle
    return handle


def basic_upload(bus, user, server, name, bits, signed: bool = False) -> int:
    return upload(bus, user, server, name, bits, signed)


def mssp_upload(bus, user, server, name, bits) -> int:
    return upload(bus, user, server, name, bits, True)


# --- operations -------------------------------------------------------------

def _request(
    bus: Bus,
    user: UserAgent,
    server: ServerAgent,
    protocol: str,
    func_id: int,
    input_bits: Sequence[int],
    handles: Sequence[int],
    attrs=(),
    signed: bool = True,
    auth: AuthKeyPair | None = None,
) -> list[int]:
    inputs = tuple(user.encrypt(input_bits))
    bus.step(user.principal_id, "encrypt", bits=len(inputs))
    msg = Message(OP_REQUEST, {
        "request_id": user.next_request_id(),
        "sender": user.principal_id,
        "protocol": protocol,
        "func_id": func_id,
        "inputs": inputs,
        "handles": tuple(handles),
        "attrs": tuple(attrs),
    })
    resp = exchange(bus, user, server, msg, signed, auth)
    out = decrypt_bits(user.eval_keys.secret, resp["outputs"])
    bus.step(user.principal_id, "decrypt", bits=len(out))
    return out


def basic_run(bus, user, server, func_id, input_bits, handles=(), signed: bool = False) -> list[int]:
    return _request(bus, user, server, "basic", func_id, input_bits, handles, signed=signed)


def mssp_run(bus, user, server, func_id, input_bits, handles=(), auth=None) -> list[int]:
    return _request(bus, user, server, "mssp", func_id, input_bits, handles, auth=auth)


def mcsp_run(
    bus: Bus,
    user: UserAgent,
    server: ServerAgent,
    func_id: int,
    input_bits: Sequence[int],
    handles: Sequence[int] = (),
    request_attrs: Sequence[AttributeValue] = (),
    auth: AuthKeyPair | None = None,
) -> list[int] | DeniedSentinel:
    """Gated run: the first decrypted bit says whether the policy granted the request."""
    enc_attrs = encrypt_attributes(user.eval_pk, list(request_attrs), user.rng)
    bits = _request(bus, user, server, "mcsp", func_id, input_bits, handles, enc_attrs, auth=auth)
    if not bits or bits[0] == 0:
        return DeniedSentinel(tuple(bits))
    return bits[1:]


# --- policy administration --------------------------------------------------

def _send_prb(bus, admin: UserAgent, server: ServerAgent, variant: str, pad_to: int | None) -> None:
    prb = admin.prb
    if prb is None:
        raise ValueError(f"{admin.principal_id} holds no policy rule base")
    pad = max(len(prb.rules), pad_to or 0)
    eprb = encrypt_prb(admin.eval_pk, prb, admin.rng, pad_to=pad)
    bus.step(admin.principal_id, "encryptPRB", rules=pad)
    msg = Message(variant, {"request_id": admin.next_request_id(), "sender": admin.principal_id, "prb": eprb})
    exchange(bus, admin, server, msg)
    admin.prb_rule_slots = pad


def mcsp_prb_upload(bus: Bus, admin: UserAgent, server: ServerAgent, prb: PolicyRuleBase | None = None) -> None:
    if prb is not None:
        admin.prb = prb
    _send_prb(bus, admin, server, PRB_UPLOAD, None)


def mcsp_prb_update(bus: Bus, admin: UserAgent, server: ServerAgent, prb: PolicyRuleBase | None = None) -> None:
    """Replace the stored PRB, padded to the previous rule count so shrinking is not visible."""
    if prb is not None:
        admin.prb = prb
    _send_prb(bus, admin, server, PRB_UPDATE, admin.prb_rule_slots)


def _identity_bits(prb: PolicyRuleBase, pk) -> tuple[int, ...]:
    entry = prb.entry(prb.identity)
    return fingerprint_subject(pk, entry.width, entry.name).bits


def rotate_auth_key(
    bus: Bus, user: UserAgent, admin: UserAgent, server: ServerAgent, new_seed: int
) -> PolicyRuleBase | None:
    """Give ``user`` a fresh auth pair; the administrator installs it and re-issues identity rules."""
    new = auth_keygen(new_seed, user.principal_id)
    old_pk = user.auth.public
    msg = Message(REKEY_ANNOUNCE, {
        "request_id": admin.next_request_id(),
        "sender": admin.principal_id,
        "kind": "auth",
        "principal": user.principal_id,
        "key": new.public,
    })
    bus.step(user.principal_id, "authKeygen", fingerprint=new.public.fingerprint)
    exchange(bus, admin, server, msg)
    user.previous_auth, user.auth = user.auth, new
    if admin is user:
        admin.auth = new
    admin.directory[user.principal_id] = new.public

    prb = admin.prb
    if prb is None or prb.identity is None:
        return prb
    old_bits, new_bits = _identity_bits(prb, old_pk), _identity_bits(prb, new.public)
    rules = []
    for rule in prb.rules:
        preds = tuple(
            (n, new_bits if n == prb.identity and b == old_bits else b) for n, b in rule.predicates
        )
        rules.append(type(rule)(preds, rule.permitted_funcs))
    mcsp_prb_update(bus, admin, server, prb.replace_rules(rules))
    return admin.prb


def revoke_user(bus: Bus, admin: UserAgent, server: ServerAgent, principal_id: str) -> PolicyRuleBase | None:
    """Drop every rule bound to the principal's identity; unknown principals are a no-op."""
    prb = admin.prb
    pk = admin.directory.get(principal_id)
    if prb is None or prb.identity is None or pk is None:
        bus.step(admin.principal_id, "revoke", principal=principal_id, removed=0)
        return prb
    bits = _identity_bits(prb, pk)
    kept = [r for r in prb.rules if dict(r.predicates).get(prb.identity) != bits]
    removed = len(prb.rules) - len(kept)
    bus.step(admin.principal_id, "revoke", principal=principal_id, removed=removed)
    if removed:
        mcsp_prb_update(bus, admin, server, prb.replace_rules(kept))
    return admin.prb


def distribute_eval_keys(keys: EvalKeyPair, users: Sequence[UserAgent]) -> None:
    """Trusted out-of-band hand-over of the shared eval pair (not a wire message)."""
    for u in users:
        u.install_eval_keys(keys)


def reencrypt_data(
    bus: Bus,
    admin: UserAgent,
    server: ServerAgent,
    strategy: str,
    new_keys: EvalKeyPair,
    partners: Sequence[UserAgent] = (),
    fallback: bool = False,
) -> str:
    """Move every stored ciphertext (and the PRB) to ``new_keys``; returns the strategy used.

    ``fallback=True`` lets a homomorphic request that cannot fit the key's
    depth proceed with the oracle strategy instead of raising.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    old = admin.eval_keys
    if strategy == HOMOMORPHIC_ROTATION:
        try:
            check_key_switch(old.public, new_keys.public)
        except CryptoError:
            if not fallback:
                raise
            strategy = ORACLE_ROTATION
            bus.step(admin.principal_id, "fallback", strategy=strategy)

    if strategy == HOMOMORPHIC_ROTATION:
        enc_sk = tuple(encrypt_bits(new_keys.public, PlainBits(secret_key_bits(old.secret)), admin.rng))
        bus.step(admin.principal_id, "encryptSecret", bits=len(enc_sk))
        msg = Message(REENCRYPT_REQUEST, {
            "request_id": admin.next_request_id(),
            "sender": admin.principal_id,
            "strategy": strategy,
            "key": new_keys.public,
            "secret_bits": enc_sk,
        })
        exchange(bus, admin, server, msg)
        distribute_eval_keys(new_keys, [admin, *partners])
        return strategy

    msg = Message(REENCRYPT_REQUEST, {
        "request_id": admin.next_request_id(),
        "sender": admin.principal_id,
        "strategy": strategy,
        "key": new_keys.public,
        "secret_bits": (),
    })
    resp = exchange(bus, admin, server, msg)
    old_cts = resp["outputs"]
    plain = decrypt_bits(old.secret, old_cts)
    bus.step(admin.principal_id, "decryptOld", bits=len(plain))
    distribute_eval_keys(new_keys, [admin, *partners])
    pos = 0
    for item in filter(None, resp["detail"].split(",")):
        h, n = (int(x) for x in item.split(":"))
        blob = tuple(admin.encrypt(plain[pos : pos + n]))
        pos += n
        up = Message(UPLOAD_DATA, {
            "request_id": admin.next_request_id(),
            "sender": admin.principal_id,
            "replace_handle": h,
            "blob": blob,
        })
        exchange(bus, admin, server, up)
    if admin.prb is not None and admin.prb_rule_slots:
        mcsp_prb_update(bus, admin, server)
    return strategy
