"""Abstract bit-level homomorphic backend."""

from __future__ import annotations

import random
from abc import ABC, abstractmethod

from oblivion.circuit import AND, CONST1, NOT, XOR, Circuit, mult_depth
from oblivion.errors import ArityMismatch, DepthExceeded, InvalidBit, KeyMismatch
from oblivion.fhe.types import Ciphertext, EvalKeyPair, EvalPublicKey, EvalSecretKey, SchemeParams


def as_rng(seed) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


def check_bit(bit) -> int:
    if bit not in (0, 1):
        raise InvalidBit(f"{bit!r} is not a bit")
    return int(bit)


def same_key(a: Ciphertext, b: Ciphertext) -> None:
    if a.key_fingerprint != b.key_fingerprint or a.backend_id != b.backend_id:
        raise KeyMismatch(
            f"operands under different keys ({a.key_fingerprint[:8]} vs {b.key_fingerprint[:8]})"
        )


class Backend(ABC):
    name: str

    @abstractmethod
    def keygen(self, params: SchemeParams | None, rng_seed) -> EvalKeyPair: ...

    @abstractmethod
    def encrypt_bit(self, pk: EvalPublicKey, bit: int, rng_seed) -> Ciphertext: ...

    @abstractmethod
    def raw_decrypt(self, sk: EvalSecretKey, ct: Ciphertext) -> int:
        """Apply the decryption formula without checking key fingerprints."""

    @abstractmethod
    def trivial(self, pk: EvalPublicKey, bit: int) -> Ciphertext:
        """Noiseless encryption of a public constant."""

    @abstractmethod
    def eval_xor(self, a: Ciphertext, b: Ciphertext) -> Ciphertext: ...

    @abstractmethod
    def eval_and(self, a: Ciphertext, b: Ciphertext) -> Ciphertext: ...

    @abstractmethod
    def eval_not(self, pk: EvalPublicKey, a: Ciphertext) -> Ciphertext: ...

    @abstractmethod
    def decryption_depth(self, pk: EvalPublicKey) -> int:
        """Multiplicative depth of this backend's decryption circuit."""

    def decrypt_bit(self, sk: EvalSecretKey, ct: Ciphertext) -> int:
        if sk.fingerprint != ct.key_fingerprint or sk.backend != ct.backend_id:
            raise KeyMismatch(
                f"ciphertext was produced under key {ct.key_fingerprint[:8]}, "
                f"secret key is for {sk.fingerprint[:8]}"
            )
        return self.raw_decrypt(sk, ct)

    def evaluate(self, pk: EvalPublicKey, func: Circuit, inputs: list[Ciphertext]) -> list[Ciphertext]:
        if len(inputs) != func.num_inputs:
            raise ArityMismatch(f"circuit expects {func.num_inputs} inputs, got {len(inputs)}")
        limit = pk.max_mult_depth
        if limit is not None:
            depth = mult_depth(func)
            if depth > limit:
                raise DepthExceeded(f"circuit needs multiplicative depth {depth}, key supports {limit}")
        for ct in inputs:
            if ct.key_fingerprint != pk.fingerprint:
                raise KeyMismatch(f"input encrypted under {ct.key_fingerprint[:8]}, evaluating with {pk.fingerprint[:8]}")
        wires = list(inputs)
        consts: dict[str, Ciphertext] = {}
        for kind, ops in func.gates:
            if kind == XOR:
                wires.append(self.eval_xor(wires[ops[0]], wires[ops[1]]))
            elif kind == AND:
                wires.append(self.eval_and(wires[ops[0]], wires[ops[1]]))
            elif kind == NOT:
                wires.append(self.eval_not(pk, wires[ops[0]]))
            else:
                if kind not in consts:
                    consts[kind] = self.trivial(pk, 1 if kind == CONST1 else 0)
                wires.append(consts[kind])
        return [wires[o] for o in func.outputs]
