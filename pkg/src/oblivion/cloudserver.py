"""The provider's storage substrate: ciphertext blobs, registered functions, encrypted PRB."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from oblivion.abac import EncryptedPRB
from oblivion.authsig import AuthPublicKey, SignedMessage, verify_message
from oblivion.circuit import Circuit
from oblivion.errors import (
    DuplicateFuncId,
    KeyMismatch,
    NotAdministrator,
    ParseError,
    SignatureRejected,
    UnknownFunc,
    UnknownHandle,
)
from oblivion.fhe import Ciphertext, EvalPublicKey
from oblivion.fhe.io import dump_ciphertexts, load_ciphertexts


@dataclass(frozen=True)
class Resource:
    handle: int
    owner: str
    key_fingerprint: str
    blob: tuple[Ciphertext, ...]


class ResourceStore:
    """Ciphertext blobs addressed by server-assigned integer handles."""

    def __init__(self):
        self._items: dict[int, Resource] = {}
        self._next = 1

    def store(self, owner: str, blob: Sequence[Ciphertext]) -> int:
        blob = tuple(blob)
        fps = {ct.key_fingerprint for ct in blob}
        if len(fps) > 1:
            raise KeyMismatch("blob mixes ciphertexts under different keys")
        handle = self._next
        self._next += 1
        self._items[handle] = Resource(handle, owner, fps.pop() if fps else "", blob)
        return handle

    def record(self, handle: int) -> Resource:
        try:
            return self._items[handle]
        except KeyError:
            raise UnknownHandle(f"no resource with handle {handle}") from None

    def fetch(self, handle: int) -> tuple[Ciphertext, ...]:
        return self.record(handle).blob

    def replace(self, handle: int, blob: Sequence[Ciphertext]) -> None:
        old = self.record(handle)
        blob = tuple(blob)
        fp = blob[0].key_fingerprint if blob else ""
        self._items[handle] = Resource(handle, old.owner, fp, blob)

    def handles(self) -> list[int]:
        return sorted(self._items)

    def __len__(self):
        return len(self._items)

    def save(self, directory: str | os.PathLike) -> None:
        """One ciphertext file per handle plus a tab-separated ``index.tsv``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        index = ["handle\towner\tfingerprint\tbytes"]
        for h in self.handles():
            r = self._items[h]
            data = dump_ciphertexts(r.blob).encode()
            (d / f"{h}.ct").write_bytes(data)
            index.append(f"{h}\t{r.owner}\t{r.key_fingerprint}\t{len(data)}")
        (d / "index.tsv").write_text("\n".join(index) + "\n")

    @classmethod
    def load(cls, directory: str | os.PathLike, pk: EvalPublicKey | None = None) -> "ResourceStore":
        d = Path(directory)
        store = cls()
        lines = (d / "index.tsv").read_text().splitlines()
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError("index line needs four tab-separated fields", lineno, str(d / "index.tsv"))
            h = int(parts[0])
            path = d / f"{h}.ct"
            blob = tuple(load_ciphertexts(path.read_text(), pk, str(path)))
            store._items[h] = Resource(h, parts[1], parts[2], blob)
            store._next = max(store._next, h + 1)
        return store


class FunctionRegistry:
    def __init__(self):
        self._funcs: dict[int, Circuit] = {}

    def register_func(self, func_id: int, circuit: Circuit) -> None:
        if func_id in self._funcs:
            raise DuplicateFuncId(f"function id {func_id} is already registered")
        if not isinstance(circuit, Circuit):
            raise TypeError("register_func needs a Circuit")
        self._funcs[func_id] = circuit

    def lookup_func(self, func_id: int) -> Circuit:
        try:
            return self._funcs[func_id]
        except KeyError:
            raise UnknownFunc(f"function id {func_id} is not registered") from None

    def ids(self) -> list[int]:
        return sorted(self._funcs)


@dataclass
class CloudServer:
    """Everything the provider stores.  Never holds an evaluation secret key."""

    eval_pk: EvalPublicKey
    administrator: str
    principals: dict[str, AuthPublicKey] = field(default_factory=dict)
    resources: ResourceStore = field(default_factory=ResourceStore)
    functions: FunctionRegistry = field(default_factory=FunctionRegistry)
    prb: EncryptedPRB | None = None
    prb_audit: list[EncryptedPRB] = field(default_factory=list)

    def authenticate(self, signed: SignedMessage) -> str:
        pk = self.principals.get(signed.signer)
        if pk is None:
            raise SignatureRejected(f"{signed.signer!r} is not a known principal")
        if not verify_message(pk, signed):
            raise SignatureRejected(f"bad signature from {signed.signer!r}")
        return signed.signer

    def require_admin(self, principal: str) -> None:
        if principal != self.administrator:
            raise NotAdministrator(f"{principal!r} is not the administrator")

    def update_prb(self, requester: str, signed: SignedMessage, eprb: EncryptedPRB) -> None:
        """Replace the PRB; every accepted version is appended to ``prb_audit``.

        A valid signature is not enough: the signer must be the administrator.
        """
        if signed.signer != requester:
            raise SignatureRejected("requester does not match the signer")
        self.authenticate(signed)
        self.require_admin(requester)
        if eprb.key_fingerprint != self.eval_pk.fingerprint:
            raise KeyMismatch("PRB is not encrypted under the current evaluation key")
        self.prb = eprb
        self.prb_audit.append(eprb)
