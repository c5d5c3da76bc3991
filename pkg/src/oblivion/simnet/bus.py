"""In-memory FIFO message bus that records a replayable transcript."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import Callable

DELIVERED = "delivered"
DROPPED = "dropped"
TAMPERED = "tampered"
INJECTED = "injected"
REPLAYED = "replayed"


@dataclass(frozen=True)
class Envelope:
    seq: int
    sender: str
    receiver: str
    variant: str
    size: int
    digest: str
    delivery_status: str


class Transcript:
    """Ordered log of envelopes, protocol steps and agent-state digests."""

    def __init__(self):
        self.entries: list[dict] = []

    def _add(self, entry: dict) -> dict:
        entry = {"seq": len(self.entries), **entry}
        self.entries.append(entry)
        return entry

    def envelope(self, env: Envelope) -> None:
        d = asdict(env)
        d.pop("seq")
        self._add({"kind": "envelope", **d})

    def step(self, actor: str, name: str, **info) -> None:
        self._add({"kind": "step", "actor": actor, "step": name, **info})

    def state(self, actor: str, digest: str) -> None:
        self._add({"kind": "state", "actor": actor, "digest": digest})

    def note(self, **info) -> None:
        self._add({"kind": "action", **info})

    def steps(self, actor: str | None = None) -> list[dict]:
        return [e for e in self.entries if e["kind"] == "step" and (actor is None or e["actor"] == actor)]

    def envelopes(self) -> list[dict]:
        return [e for e in self.entries if e["kind"] == "envelope"]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in self.entries)

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()


Tap = Callable[[str, str, str, bytes], "tuple[bytes | None, str] | None"]


class Bus:
    """Reliable FIFO delivery; taps (the adversary) may rewrite or drop messages."""

    def __init__(self, transcript: Transcript | None = None):
        self.transcript = transcript if transcript is not None else Transcript()
        self.history: list[tuple[str, str, str, bytes]] = []
        self.taps: list[Tap] = []
        self._seq = 0

    def send(self, sender: str, receiver: str, variant: str, data: bytes, status: str = DELIVERED) -> bytes | None:
        for tap in self.taps:
            hit = tap(sender, receiver, variant, data)
            if hit is not None:
                data, status = hit
                break
        digest = hashlib.sha256(data).hexdigest() if data is not None else ""
        env = Envelope(self._seq, sender, receiver, variant, len(data or b""), digest, status)
        self._seq += 1
        self.transcript.envelope(env)
        if data is None or status == DROPPED:
            return None
        self.history.append((sender, receiver, variant, data))
        return data

    def step(self, actor: str, name: str, **info) -> None:
        self.transcript.step(actor, name, **info)

    def state(self, actor: str, digest: str) -> None:
        self.transcript.state(actor, digest)
