"""Protocol participants: data owners and partners on one side, the provider on the other."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from oblivion import errors
from oblivion.abac import (
    EncryptedAttribute,
    EncryptedPRB,
    PolicyRuleBase,
    compile_for,
    fingerprint_subject,
    gate_output,
    int_to_bits,
    verify_access,
)
from oblivion.authsig import AuthKeyPair, AuthPublicKey, verify_message
from oblivion.circuit import Circuit, mult_depth
from oblivion.cloudserver import CloudServer
from oblivion.errors import (
    ArityMismatch,
    DepthExceeded,
    EncodingError,
    KeyMismatch,
    OblivionError,
    ProtocolMismatch,
    ReplayRejected,
    ServerSignatureInvalid,
    SignatureRejected,
)
from oblivion.fhe import (
    Ciphertext,
    EvalKeyPair,
    EvalPublicKey,
    check_key_switch,
    encrypt_bits,
    evaluate,
    key_switch,
    trivial,
)
from oblivion.protocol.messages import (
    OP_REQUEST,
    OP_RESPONSE,
    PRB_UPDATE,
    PRB_UPLOAD,
    REENCRYPT_REQUEST,
    REKEY_ANNOUNCE,
    STATUS_OK,
    UPLOAD_DATA,
    Message,
    from_wire,
    to_wire,
)
from oblivion.simnet.bus import Bus
from oblivion.simnet.leakage import PlainBits, scan, state_digest

ORACLE_ROTATION = "oracle_rotation"
HOMOMORPHIC_ROTATION = "homomorphic_rotation"
STRATEGIES = (ORACLE_ROTATION, HOMOMORPHIC_ROTATION)


def error_class(name: str) -> type[OblivionError]:
    cls = getattr(errors, name, None)
    if isinstance(cls, type) and issubclass(cls, OblivionError):
        return cls
    return OblivionError


@dataclass
class UserAgent:
    """A data owner or partner.  Holds its own auth pair and, when shared, the eval pair."""

    principal_id: str
    auth: AuthKeyPair
    eval_keys: EvalKeyPair | None = None
    is_admin: bool = False
    seed: int = 0
    prb: PolicyRuleBase | None = None
    directory: dict[str, AuthPublicKey] = field(default_factory=dict)
    server_auth: AuthPublicKey | None = None
    previous_auth: AuthKeyPair | None = None
    previous_eval: EvalKeyPair | None = None
    data: dict[str, PlainBits] = field(default_factory=dict)
    handles: dict[str, int] = field(default_factory=dict)
    prb_rule_slots: int = 0
    counter: int = 0

    def __post_init__(self):
        self.rng = random.Random(f"user:{self.principal_id}:{self.seed}")

    @property
    def eval_pk(self) -> EvalPublicKey:
        if self.eval_keys is None:
            raise KeyMismatch(f"{self.principal_id} holds no evaluation key")
        return self.eval_keys.public

    def next_request_id(self) -> str:
        self.counter += 1
        return f"{self.principal_id}-{self.counter}"

    def encrypt(self, bits) -> list[Ciphertext]:
        return encrypt_bits(self.eval_pk, PlainBits(bits), self.rng)

    def install_eval_keys(self, keys: EvalKeyPair) -> None:
        """Trusted out-of-band hand-over of a (new) shared eval pair."""
        if self.eval_keys is not None and self.eval_keys.fingerprint != keys.fingerprint:
            self.previous_eval = self.eval_keys
        self.eval_keys = keys

    def open_response(self, wire: bytes | None, signed: bool) -> Message:
        if wire is None:
            raise ServerSignatureInvalid("no response delivered")
        try:
            msg, sm = from_wire(wire)
        except EncodingError as exc:
            raise ServerSignatureInvalid(f"response does not decode: {exc}") from None
        if msg.variant != OP_RESPONSE:
            raise ServerSignatureInvalid(f"expected a response, got {msg.variant}")
        if signed:
            if sm is None or self.server_auth is None or not verify_message(self.server_auth, sm):
                raise ServerSignatureInvalid("response signature does not verify")
        if msg["status"] != STATUS_OK:
            raise error_class(msg["status"])(msg["detail"])
        return msg


class ServerAgent:
    """The provider.  Knows public keys only; every handled message re-checks that."""

    def __init__(
        self,
        principal_id: str,
        auth: AuthKeyPair,
        cloud: CloudServer,
        protocol: str = "mssp",
        require_signatures: bool = True,
    ):
        self.principal_id = principal_id
        self.auth = auth
        self.cloud = cloud
        self.protocol = protocol
        self.require_signatures = require_signatures
        self.seen: set[tuple[str, str]] = set()
        self._canaccess: dict[tuple, Circuit] = {}

    # -- helpers -----------------------------------------------------------

    def _respond(self, request_id: str, status: str, detail: str = "", outputs=()) -> bytes:
        msg = Message(OP_RESPONSE, {
            "request_id": request_id,
            "sender": self.principal_id,
            "status": status,
            "detail": detail,
            "outputs": tuple(outputs),
        })
        return to_wire(msg, self.auth if self.require_signatures else None)

    def canaccess_for(self, prb: EncryptedPRB) -> Circuit:
        key = prb.shape
        if key not in self._canaccess:
            self._canaccess[key] = compile_for(prb)
        return self._canaccess[key]

    def assert_secrecy(self) -> None:
        report = scan(self.cloud)
        if not report.clean:
            raise AssertionError(f"server state holds secrets: {report.violations}")

    def _check_key(self, cts) -> None:
        fp = self.cloud.eval_pk.fingerprint
        for ct in cts:
            if ct.key_fingerprint != fp:
                raise KeyMismatch("ciphertext is not under the current evaluation key")

    # -- entry point -------------------------------------------------------

    def handle(self, wire: bytes, bus: Bus) -> bytes:
        request_id = ""
        try:
            msg, signed = from_wire(wire, self.cloud.eval_pk)
            request_id = msg.request_id
            bus.step(self.principal_id, "receive", variant=msg.variant, request=request_id)
            if self.require_signatures:
                try:
                    if signed is None:
                        raise SignatureRejected("message is not signed")
                    self.cloud.authenticate(signed)
                except SignatureRejected:
                    bus.step(self.principal_id, "verifySig", ok=False, request=request_id)
                    raise
                bus.step(self.principal_id, "verifySig", ok=True, request=request_id)
                if (msg.sender, request_id) in self.seen:
                    raise ReplayRejected(f"request {request_id} was already processed")
                self.seen.add((msg.sender, request_id))
            outputs, detail = self._dispatch(msg, signed, bus)
            status = STATUS_OK
        except OblivionError as exc:
            outputs, detail, status = (), str(exc), type(exc).__name__
            bus.step(self.principal_id, "reject", error=status, request=request_id)
        self.assert_secrecy()
        bus.state(self.principal_id, state_digest(self.cloud))
        out = self._respond(request_id, status, detail, outputs)
        if self.require_signatures:
            bus.step(self.principal_id, "sign", request=request_id)
        return out

    def _dispatch(self, msg: Message, signed, bus: Bus) -> tuple[tuple, str]:
        v = msg.variant
        if v == UPLOAD_DATA:
            return self._upload(msg, bus)
        if v == OP_REQUEST:
            return self._operate(msg, bus), ""
        if v in (PRB_UPLOAD, PRB_UPDATE):
            if signed is None:
                raise SignatureRejected("policy writes must be signed")
            self.cloud.update_prb(msg.sender, signed, msg["prb"])
            bus.step(self.principal_id, "storePRB", rules=len(msg["prb"].rules))
            return (), str(len(self.cloud.prb_audit))
        if v == REKEY_ANNOUNCE:
            return self._rekey(msg, bus)
        if v == REENCRYPT_REQUEST:
            return self._reencrypt(msg, bus)
        raise ProtocolMismatch(f"server does not accept {v}")

    def _upload(self, msg: Message, bus: Bus):
        blob = msg["blob"]
        self._check_key(blob)
        h = msg["replace_handle"]
        if h:
            if self.require_signatures and self.cloud.resources.record(h).owner != msg.sender:
                self.cloud.require_admin(msg.sender)
            self.cloud.resources.replace(h, blob)
        else:
            h = self.cloud.resources.store(msg.sender, blob)
        bus.step(self.principal_id, "store", handle=h, size=len(blob))
        return (), str(h)

    def _operate(self, msg: Message, bus: Bus) -> tuple:
        proto = msg["protocol"]
        if proto != self.protocol:
            raise ProtocolMismatch(f"server runs {self.protocol}, request is {proto}")
        pk = self.cloud.eval_pk
        func = self.cloud.functions.lookup_func(msg["func_id"])
        data = [ct for h in msg["handles"] for ct in self.cloud.resources.fetch(h)]
        inputs = list(msg["inputs"]) + data
        self._check_key(inputs)
        if len(inputs) != func.num_inputs:
            raise ArityMismatch(f"function {msg['func_id']} takes {func.num_inputs} bits, got {len(inputs)}")
        if proto != "mcsp":
            outputs = evaluate(pk, func, inputs)
            bus.step(self.principal_id, "evaluate", func=msg["func_id"], gates=len(func.gates))
            return tuple(outputs)

        prb = self.cloud.prb
        if prb is None:
            raise ProtocolMismatch("no policy rule base has been uploaded")
        canaccess = self.canaccess_for(prb)
        limit = pk.max_mult_depth
        need = max(mult_depth(canaccess), mult_depth(func)) + 1
        if limit is not None and need > limit:
            raise DepthExceeded(f"gated evaluation needs depth {need}, key supports {limit}")
        attrs = {a.name: a for a in msg["attrs"]}
        if prb.identity is not None:
            # the subject identity comes from the authenticated signer, never from the client
            width = next(e.width for e in prb.schema if e.name == prb.identity)
            ident = fingerprint_subject(self.cloud.principals[msg.sender], width, prb.identity)
            attrs[prb.identity] = EncryptedAttribute(
                prb.identity, tuple(trivial(pk, b) for b in ident.bits), ident.category
            )
        enc_fid = [trivial(pk, b) for b in int_to_bits(msg["func_id"], prb.func_id_width)]
        self._check_key(ct for a in attrs.values() for ct in a.ciphertexts)
        decision = verify_access(pk, canaccess, attrs, enc_fid, prb)
        bus.step(self.principal_id, "verifyAccess", gates=len(canaccess.gates))
        outputs = evaluate(pk, func, inputs)
        bus.step(self.principal_id, "evaluate", func=msg["func_id"], gates=len(func.gates))
        gated = [decision] + gate_output(pk, decision, outputs)
        bus.step(self.principal_id, "gateOutput", width=len(gated))
        return tuple(gated)

    def _rekey(self, msg: Message, bus: Bus):
        self.cloud.require_admin(msg.sender)
        kind, key = msg["kind"], msg["key"]
        if kind == "auth":
            if not isinstance(key, AuthPublicKey):
                raise EncodingError("auth rekey needs an auth public key")
            self.cloud.principals[msg["principal"]] = key
        elif kind == "eval":
            if not isinstance(key, EvalPublicKey):
                raise EncodingError("eval rekey needs an eval public key")
            self.cloud.eval_pk = key
        else:
            raise EncodingError(f"unknown rekey kind {kind!r}")
        bus.step(self.principal_id, "rekey", kind=kind, principal=msg["principal"])
        return (), ""

    def _reencrypt(self, msg: Message, bus: Bus):
        self.cloud.require_admin(msg.sender)
        new_pk = msg["key"]
        if not isinstance(new_pk, EvalPublicKey):
            raise EncodingError("re-encryption needs an eval public key")
        old_pk = self.cloud.eval_pk
        store = self.cloud.resources
        strategy = msg["strategy"]
        if strategy == ORACLE_ROTATION:
            # hand the old blobs to the trusted client, which returns replacements
            detail = ",".join(f"{h}:{len(store.fetch(h))}" for h in store.handles())
            outputs = tuple(ct for h in store.handles() for ct in store.fetch(h))
            self.cloud.eval_pk = new_pk
            bus.step(self.principal_id, "exportForRotation", resources=len(store))
            return outputs, detail
        if strategy != HOMOMORPHIC_ROTATION:
            raise EncodingError(f"unknown re-encryption strategy {strategy!r}")
        check_key_switch(old_pk, new_pk)
        enc_sk = msg["secret_bits"]
        switch = lambda ct: key_switch(old_pk, new_pk, ct, enc_sk)  # noqa: E731
        for h in store.handles():
            store.replace(h, [switch(ct) for ct in store.fetch(h)])
        if self.cloud.prb is not None:
            p = self.cloud.prb
            rules = tuple(tuple(switch(ct) for ct in r) for r in p.rules)
            self.cloud.prb = EncryptedPRB(p.schema, p.func_id_width, p.func_slots, p.identity, rules, new_pk.fingerprint)
        self.cloud.eval_pk = new_pk
        bus.step(self.principal_id, "keySwitch", resources=len(store), backend=new_pk.backend)
        return (), ""
