"""Mallory: a single adversary with a fixed set of capabilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from oblivion.abac import encrypt_attributes
from oblivion.authsig import AuthKeyPair, auth_keygen
from oblivion.errors import ScenarioError
from oblivion.fhe import (
    EvalKeyPair,
    EvalPublicKey,
    EvalSecretKey,
    encrypt_bits,
    keygen,
    raw_decrypt_bits,
)
from oblivion.protocol.agents import ServerAgent, UserAgent
from oblivion.protocol.messages import OP_REQUEST, OP_RESPONSE, Message, from_wire, to_wire
from oblivion.simnet.bus import INJECTED, REPLAYED, TAMPERED, Bus
from oblivion.simnet.leakage import LeakageReport, scan

INJECT = "inject_request"
REPLAY = "replay"
TAMPER = "tamper_payload"
STEAL_AUTH = "steal_auth_sk"
STEAL_EVAL = "steal_eval_sk"
READ_SERVER = "read_server_state"
CAPABILITIES = (INJECT, REPLAY, TAMPER, STEAL_AUTH, STEAL_EVAL, READ_SERVER)

# what the provider may legitimately expose
PUBLIC_CLASSES = frozenset(
    {"ciphertext", "eval_public_key", "auth_public_key", "circuit_shape", "policy_schema", "metadata"}
)


@dataclass(frozen=True)
class AdversaryConfig:
    capabilities: frozenset[str] = frozenset()
    steal_auth_from: str | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "capabilities", frozenset(self.capabilities))
        unknown = self.capabilities - set(CAPABILITIES)
        if unknown:
            raise ScenarioError(f"unknown adversary capabilities {sorted(unknown)}")
        if (STEAL_AUTH in self.capabilities) != (self.steal_auth_from is not None):
            raise ScenarioError("steal_auth_sk needs exactly one victim principal")


@dataclass
class Attempt:
    """Result of one adversarial request."""

    status: str
    outputs: list[int] = field(default_factory=list)
    evaluated: bool = False


class Mallory:
    principal_id = "mallory"

    def __init__(self, config: AdversaryConfig, backend: str, params=None):
        self.config = config
        self.rng_seed = 7_000_000 + config.seed
        self.auth = auth_keygen(self.rng_seed, "mallory")
        # a key pair of the same scheme, used for best-effort decryption
        self.own_eval: EvalKeyPair = keygen(params, self.rng_seed, backend)
        self.stolen_auth: AuthKeyPair | None = None
        self.stolen_eval: EvalSecretKey | None = None
        self._tamper_victim: str | None = None
        self._counter = 0

    def can(self, cap: str) -> bool:
        return cap in self.config.capabilities

    def require(self, cap: str) -> None:
        if not self.can(cap):
            raise ScenarioError(f"adversary lacks capability {cap!r}")

    def steal(self, victims: dict[str, UserAgent]) -> None:
        """Apply the configured key thefts (done once at scenario start)."""
        if self.can(STEAL_AUTH):
            victim = victims.get(self.config.steal_auth_from)
            if victim is None:
                raise ScenarioError(f"cannot steal from unknown principal {self.config.steal_auth_from!r}")
            self.stolen_auth = victim.auth
        if self.can(STEAL_EVAL):
            holder = next((u for u in victims.values() if u.eval_keys is not None), None)
            if holder is None:
                raise ScenarioError("no principal holds an eval key to steal")
            self.stolen_eval = holder.eval_keys.secret

    def _next_id(self) -> str:
        self._counter += 1
        return f"mallory-{self._counter}"

    def best_decrypt(self, outputs) -> list[int]:
        """Decrypt with the stolen eval key if any, otherwise with Mallory's own key."""
        sk = self.stolen_eval if self.stolen_eval is not None else self.own_eval.secret
        return raw_decrypt_bits(sk, outputs)

    def _deliver(self, bus: Bus, server: ServerAgent, wire: bytes, status: str) -> Attempt:
        before = len(bus.transcript.steps(server.principal_id))
        delivered = bus.send(self.principal_id, server.principal_id, OP_REQUEST, wire, status)
        reply = server.handle(delivered, bus)
        back = bus.send(server.principal_id, self.principal_id, OP_RESPONSE, reply)
        evaluated = any(
            s["step"] == "evaluate" for s in bus.transcript.steps(server.principal_id)[before:]
        )
        msg, _ = from_wire(back)
        if msg["status"] != "ok":
            return Attempt(msg["status"], [], evaluated)
        return Attempt("accepted", self.best_decrypt(msg["outputs"]), evaluated)

    def request(
        self,
        bus: Bus,
        server: ServerAgent,
        eval_pk: EvalPublicKey,
        claim: str,
        func_id: int,
        input_bits: Sequence[int],
        handles: Sequence[int] = (),
        attrs=(),
        use_stolen_auth: bool = False,
    ) -> Attempt:
        """Craft a request claiming to come from ``claim``.

        Without a stolen key the signature is made with Mallory's own key,
        which is not the one registered for ``claim``.
        """
        self.require(INJECT)
        if use_stolen_auth:
            self.require(STEAL_AUTH)
            signer = self.stolen_auth
        else:
            signer = AuthKeyPair(self.auth.public, self.auth.secret, claim)
        inputs = tuple(encrypt_bits(eval_pk, list(input_bits), self.rng_seed + self._counter))
        enc_attrs = encrypt_attributes(eval_pk, list(attrs), self.rng_seed + 1 + self._counter)
        msg = Message(OP_REQUEST, {
            "request_id": self._next_id(),
            "sender": claim,
            "protocol": server.protocol,
            "func_id": func_id,
            "inputs": inputs,
            "handles": tuple(handles),
            "attrs": tuple(enc_attrs) if server.protocol == "mcsp" else (),
        })
        return self._deliver(bus, server, to_wire(msg, signer), INJECTED)

    def replay(self, bus: Bus, server: ServerAgent) -> Attempt:
        self.require(REPLAY)
        for sender, receiver, variant, data in reversed(bus.history):
            if variant == OP_REQUEST and sender != self.principal_id and receiver == server.principal_id:
                return self._deliver(bus, server, data, REPLAYED)
        raise ScenarioError("nothing to replay: no request seen on the bus yet")

    def arm_tamper(self, bus: Bus, victim: str) -> None:
        """Corrupt the next response addressed to ``victim``."""
        self.require(TAMPER)
        self._tamper_victim = victim

        def tap(sender, receiver, variant, data):
            if self._tamper_victim != receiver or variant != OP_RESPONSE:
                return None
            self._tamper_victim = None
            bus.taps.remove(tap)
            flipped = bytearray(data)
            flipped[-5] ^= 0x01
            return bytes(flipped), TAMPERED

        bus.taps.append(tap)

    def read_server(self, server: ServerAgent) -> LeakageReport:
        if not self.can(READ_SERVER):
            return LeakageReport(enabled=False)
        return scan(server.cloud)


def leakage_verdict(report: LeakageReport) -> str:
    if not report.enabled:
        return "no-access"
    if report.clean and set(report.counts) <= PUBLIC_CLASSES:
        return "ciphertext-only"
    return "leak"

