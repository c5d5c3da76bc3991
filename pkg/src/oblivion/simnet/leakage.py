"""Structural scan of server-side state for anything that is not public.

Every reachable value is classified; plaintext-bearing or secret types are
violations.  Plaintext provenance is carried by :class:`PlainBits`, which
client code uses for every plaintext bit vector it holds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field

from oblivion.abac import AttributeValue, PolicyRule, PolicyRuleBase, SchemaEntry
from oblivion.authsig import AuthKeyPair, AuthPublicKey, AuthSecretKey
from oblivion.circuit import Circuit
from oblivion.fhe import Ciphertext, EvalKeyPair, EvalPublicKey, EvalSecretKey


class PlainBits(tuple):
    """A plaintext bit vector, tagged so leakage scans can find it."""

    def __new__(cls, bits=()):
        return super().__new__(cls, (int(b) for b in bits))


VIOLATIONS = {
    EvalSecretKey: "eval_secret_key",
    EvalKeyPair: "eval_secret_key",
    AuthSecretKey: "auth_secret_key",
    AuthKeyPair: "auth_secret_key",
    PlainBits: "plaintext",
    AttributeValue: "plaintext",
    PolicyRule: "plaintext",
    PolicyRuleBase: "plaintext",
}


@dataclass
class LeakageReport:
    enabled: bool = True
    counts: dict[str, int] = field(default_factory=dict)
    violations: list[tuple[str, str]] = field(default_factory=list)
    public_view: str = ""
    ciphertext_digest: str = ""

    @property
    def clean(self) -> bool:
        return not self.violations

    def classes(self) -> list[str]:
        return sorted(self.counts)

    def summary(self) -> str:
        if not self.enabled:
            return "no access to server state"
        parts = ", ".join(f"{k}={v}" for k, v in sorted(self.counts.items()))
        verdict = "ciphertext-only" if self.clean else f"{len(self.violations)} violation(s)"
        return f"{verdict}: {parts}"


def scan(obj, skip: tuple[str, ...] = ()) -> LeakageReport:
    counts: Counter[str] = Counter()
    violations: list[tuple[str, str]] = []
    ct_hash = hashlib.sha256()
    seen: set[int] = set()

    def walk(x, path: str):
        for typ, label in VIOLATIONS.items():
            if isinstance(x, typ):
                violations.append((path, label))
                counts[label] += 1
                return "<" + label + ">"
        if isinstance(x, Ciphertext):
            counts["ciphertext"] += 1
            ct_hash.update(f"{x.value:x}|{x.key_fingerprint};".encode())
            return {"ct": x.backend_id, "key": x.key_fingerprint}
        if isinstance(x, EvalPublicKey):
            counts["eval_public_key"] += 1
            return {"eval_pk": x.fingerprint}
        if isinstance(x, AuthPublicKey):
            counts["auth_public_key"] += 1
            return {"auth_pk": x.fingerprint}
        if isinstance(x, Circuit):
            counts["circuit_shape"] += 1
            return {"circuit": [x.num_inputs, len(x.gates), len(x.outputs)]}
        if isinstance(x, SchemaEntry):
            counts["policy_schema"] += 1
            return [x.name, x.width, x.category]
        if x is None or isinstance(x, (bool, int, float, str, bytes)):
            counts["metadata"] += 1
            return x.hex() if isinstance(x, bytes) else x
        if id(x) in seen:
            return "<cycle>"
        seen.add(id(x))
        if dataclasses.is_dataclass(x):
            return {
                f.name: walk(getattr(x, f.name), f"{path}.{f.name}")
                for f in dataclasses.fields(x)
                if f.name not in skip
            }
        if isinstance(x, dict):
            return {str(k): walk(v, f"{path}[{k!r}]") for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
        if isinstance(x, (list, tuple, set, frozenset)):
            items = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else x
            return [walk(v, f"{path}[{i}]") for i, v in enumerate(items)]
        if hasattr(x, "__dict__"):
            return {
                k: walk(v, f"{path}.{k}")
                for k, v in sorted(vars(x).items())
                if k not in skip
            }
        counts["opaque"] += 1
        return repr(type(x))

    view = walk(obj, "server")
    return LeakageReport(
        True,
        dict(counts),
        violations,
        json.dumps(view, sort_keys=True, default=str),
        ct_hash.hexdigest(),
    )


def state_digest(obj, skip: tuple[str, ...] = ()) -> str:
    r = scan(obj, skip)
    return hashlib.sha256((r.public_view + r.ciphertext_digest).encode()).hexdigest()[:32]
