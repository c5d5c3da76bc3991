"""Value types shared by all homomorphic backends."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from oblivion.errors import InvalidParams

CLEAR = "clear"
TOY = "toy"
BACKENDS = (CLEAR, TOY)

# bit length of the multipliers q_i in the public key elements p*q_i + 2*r_i
MULTIPLIER_BITS = 64

# headroom assumed per AND level when deriving max_mult_depth: each AND operand
# may be an XOR of up to this many wires of the previous level, then negated
XOR_FANIN_SLACK = 4


def fresh_noise_bound(noise_bits: int, pk_elements: int) -> int:
    """Largest noise of a fresh toy ciphertext: m + 2r + sum of 2*r_i."""
    r_max = (1 << noise_bits) - 1
    return 1 + 2 * r_max * pk_elements


def derive_max_mult_depth(secret_bits: int, noise_bits: int, pk_elements: int) -> int:
    """Deepest balanced AND tree whose worst-case noise stays below the secret.

    Every level also absorbs ``XOR_FANIN_SLACK`` XORs and a NOT per operand,
    so circuits mixing linear gates between AND layers fit the same bound.
    """
    bound = fresh_noise_bound(noise_bits, pk_elements)
    if bound.bit_length() > secret_bits - 1:
        return -1
    depth = 0
    while True:
        v = XOR_FANIN_SLACK * bound + 1
        nxt = v * v
        if nxt.bit_length() > secret_bits - 1:
            return depth
        bound = nxt
        depth += 1


@dataclass(frozen=True)
class SchemeParams:
    secret_bits: int
    noise_bits: int
    pk_elements: int
    max_mult_depth: int = -1  # -1: derive from the other three

    def __post_init__(self):
        for name in ("secret_bits", "noise_bits", "pk_elements"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise InvalidParams(f"{name} must be a positive integer, got {v!r}")
        if self.pk_elements < 2:
            raise InvalidParams("pk_elements must be at least 2 (modulus plus one noisy element)")
        if self.secret_bits <= self.noise_bits + 2:
            raise InvalidParams("secret_bits must exceed noise_bits + 2")
        derived = derive_max_mult_depth(self.secret_bits, self.noise_bits, self.pk_elements)
        if derived < 0:
            raise InvalidParams("fresh ciphertexts would not decrypt: secret_bits too small")
        if self.max_mult_depth == -1:
            object.__setattr__(self, "max_mult_depth", derived)
        elif not 0 <= self.max_mult_depth <= derived:
            raise InvalidParams(
                f"max_mult_depth={self.max_mult_depth} not supported; these parameters allow at most {derived}"
            )

    @classmethod
    def parse(cls, text: str) -> "SchemeParams":
        """Parse ``"secret_bits,noise_bits,pk_elements"``."""
        try:
            a, b, c = (int(x) for x in text.split(","))
        except ValueError:
            raise InvalidParams(f"params must be three comma-separated integers, got {text!r}") from None
        return cls(a, b, c)

    def as_header(self) -> str:
        return f"{self.secret_bits},{self.noise_bits},{self.pk_elements}"


# secret_bits is far above the 256 one might expect: the depth of the access
# policy circuit plus output gating needs max_mult_depth >= 9
DEFAULT_PARAMS = SchemeParams(secret_bits=16384, noise_bits=16, pk_elements=32)
SMALL_PARAMS = SchemeParams(secret_bits=1024, noise_bits=16, pk_elements=32)


@dataclass(frozen=True)
class EvalPublicKey:
    backend: str
    params: SchemeParams | None
    elements: tuple[int, ...]
    fingerprint: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.fingerprint:
            object.__setattr__(self, "fingerprint", key_fingerprint(self))

    @property
    def modulus(self) -> int:
        """Exact multiple of the secret used to reduce ciphertexts (toy only)."""
        return self.elements[0]

    @property
    def max_mult_depth(self) -> int | None:
        return None if self.params is None else self.params.max_mult_depth


@dataclass(frozen=True, repr=False)
class EvalSecretKey:
    backend: str
    value: int
    fingerprint: str
    params: SchemeParams | None = None

    def __repr__(self):
        return f"EvalSecretKey(backend={self.backend!r}, fingerprint={self.fingerprint!r})"


@dataclass(frozen=True)
class EvalKeyPair:
    public: EvalPublicKey
    secret: EvalSecretKey

    @property
    def fingerprint(self) -> str:
        return self.public.fingerprint


def public_key_text(pk: EvalPublicKey) -> str:
    params = pk.params.as_header() if pk.params else "0,0,0"
    lines = [f"OBLIVION-EVALKEY v1; params={params}; backend={pk.backend}; part=public"]
    lines.extend(format(e, "x") for e in pk.elements)
    return "\n".join(lines) + "\n"


def key_fingerprint(pk: EvalPublicKey) -> str:
    return hashlib.sha256(public_key_text(pk).encode()).hexdigest()[:32]


@dataclass(frozen=True, repr=False)
class Ciphertext:
    """One encrypted bit.

    ``noise_bound`` is a worst-case bound on the decryption noise, tracked
    exactly gate by gate; ``noise_budget`` is the number of bits left before
    that bound could reach the secret.  ``modulus`` travels with the value
    so that gates can reduce products without a key handle.
    """

    value: int
    key_fingerprint: str
    backend_id: str
    noise_bound: int = 0
    secret_bits: int = 0
    modulus: int = field(default=0, compare=False, repr=False)

    def __repr__(self):
        v = format(self.value, "x")
        if len(v) > 16:
            v = v[:8] + "..." + v[-8:]
        return (
            f"Ciphertext({self.backend_id}, 0x{v}, budget={self.noise_budget}, "
            f"key={self.key_fingerprint[:8]})"
        )

    @property
    def noise_budget(self) -> float:
        if self.backend_id == CLEAR:
            return math.inf
        return self.secret_bits - self.noise_bound.bit_length()
