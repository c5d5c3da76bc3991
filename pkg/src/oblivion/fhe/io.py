"""Text formats for evaluation keys and ciphertexts.

Key file::

    OBLIVION-EVALKEY v1; params=<secret_bits>,<noise_bits>,<pk_elements>; backend=toy; part=public
    <hex element>            (one per line)

The secret part uses ``part=secret; fingerprint=<hex>`` and a single hex line.
Ciphertext file: a header, then three lines per ciphertext: hex value,
decimal noise budget (``inf`` on the clear backend), fingerprint hex.
"""

from __future__ import annotations

import math
import re
from typing import Sequence

from oblivion.errors import ParseError
from oblivion.fhe.types import (
    BACKENDS,
    CLEAR,
    Ciphertext,
    EvalPublicKey,
    EvalSecretKey,
    SchemeParams,
    public_key_text,
)

_KEY_HEADER = re.compile(r"^OBLIVION-EVALKEY v1; params=(\d+),(\d+),(\d+)((?:; [a-z_]+=[^;]*)*)$")
_CT_HEADER = re.compile(r"^OBLIVION-CT v1((?:; [a-z_]+=[^;]*)*)$")


def _attrs(tail: str) -> dict[str, str]:
    out = {}
    for part in tail.split(";"):
        part = part.strip()
        if part:
            k, _, v = part.partition("=")
            out[k] = v
    return out


def _lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def _hex(s: str, lineno: int, source) -> int:
    try:
        return int(s, 16)
    except ValueError:
        raise ParseError(f"expected hex integer, got {s[:20]!r}", lineno, source) from None


def _params(a, b, c) -> SchemeParams | None:
    a, b, c = int(a), int(b), int(c)
    return None if a == 0 else SchemeParams(a, b, c)


def dump_public_key(pk: EvalPublicKey) -> str:
    return public_key_text(pk)


def dump_secret_key(sk: EvalSecretKey) -> str:
    params = sk.params.as_header() if sk.params else "0,0,0"
    return (
        f"OBLIVION-EVALKEY v1; params={params}; backend={sk.backend}; part=secret; "
        f"fingerprint={sk.fingerprint}\n{sk.value:x}\n"
    )


def load_key(text: str, source: str | None = None) -> EvalPublicKey | EvalSecretKey:
    lines = _lines(text)
    if not lines:
        raise ParseError("empty key file", None, source)
    m = _KEY_HEADER.match(lines[0])
    if not m:
        raise ParseError("expected 'OBLIVION-EVALKEY v1; params=...' header", 1, source)
    params = _params(*m.group(1, 2, 3))
    attrs = _attrs(m.group(4))
    backend = attrs.get("backend", "toy")
    if backend not in BACKENDS:
        raise ParseError(f"unknown backend {backend!r}", 1, source)
    values = [_hex(s, i + 2, source) for i, s in enumerate(lines[1:])]
    if attrs.get("part", "public") == "secret":
        if len(values) != 1 or "fingerprint" not in attrs:
            raise ParseError("secret key file needs one value and a fingerprint", 1, source)
        return EvalSecretKey(backend, values[0], attrs["fingerprint"], params)
    if not values:
        raise ParseError("public key has no elements", None, source)
    return EvalPublicKey(backend, params, tuple(values))


def dump_ciphertexts(cts: Sequence[Ciphertext]) -> str:
    backend = cts[0].backend_id if cts else CLEAR
    bits = cts[0].secret_bits if cts else 0
    lines = [f"OBLIVION-CT v1; backend={backend}; secret_bits={bits}; count={len(cts)}"]
    for ct in cts:
        budget = ct.noise_budget
        lines.append(format(ct.value, "x"))
        lines.append("inf" if math.isinf(budget) else str(int(budget)))
        lines.append(ct.key_fingerprint)
    return "\n".join(lines) + "\n"


def load_ciphertexts(text: str, pk: EvalPublicKey | None = None, source: str | None = None) -> list[Ciphertext]:
    """Parse a ciphertext file; ``pk`` restores the reduction modulus for toy ciphertexts."""
    lines = _lines(text)
    if not lines:
        raise ParseError("empty ciphertext file", None, source)
    m = _CT_HEADER.match(lines[0])
    if not m:
        raise ParseError("expected 'OBLIVION-CT v1' header", 1, source)
    attrs = _attrs(m.group(1))
    backend = attrs.get("backend", "")
    if backend not in BACKENDS:
        raise ParseError(f"unknown backend {backend!r}", 1, source)
    try:
        secret_bits = int(attrs.get("secret_bits", "0"))
        count = int(attrs.get("count", "-1"))
    except ValueError:
        raise ParseError("malformed ciphertext header", 1, source) from None
    body = lines[1:]
    if len(body) % 3 or (count >= 0 and len(body) != 3 * count):
        raise ParseError(f"expected {count} ciphertexts of three lines each", None, source)
    modulus = pk.modulus if (pk is not None and backend != CLEAR) else 0
    out = []
    for i in range(0, len(body), 3):
        lineno = i + 2
        value = _hex(body[i], lineno, source)
        budget_s, fp = body[i + 1], body[i + 2]
        if backend == CLEAR:
            bound = 0
        else:
            try:
                budget = int(budget_s)
            except ValueError:
                raise ParseError(f"bad noise budget {budget_s!r}", lineno + 1, source) from None
            bound = max(1, (1 << max(0, secret_bits - budget)) - 1)
        out.append(Ciphertext(value, fp, backend, bound, secret_bits, modulus))
    return out
