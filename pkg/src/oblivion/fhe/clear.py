"""Transparent backend: a ciphertext's value is its plaintext bit.

Used as a correctness oracle for protocol logic.  It offers no
confidentiality whatsoever; keys exist only so fingerprint checks behave
exactly as with a real scheme.
"""

from __future__ import annotations

from oblivion.errors import KeyMismatch
from oblivion.fhe.base import Backend, as_rng, check_bit, same_key
from oblivion.fhe.types import CLEAR, Ciphertext, EvalKeyPair, EvalPublicKey, EvalSecretKey


class ClearBackend(Backend):
    name = CLEAR

    def keygen(self, params, rng_seed) -> EvalKeyPair:
        rng = as_rng(rng_seed)
        secret = rng.getrandbits(64) | 1
        # a single even tag: decrypts to 0 and makes fingerprints seed-dependent
        pk = EvalPublicKey(CLEAR, None, (rng.getrandbits(63) << 1,))
        return EvalKeyPair(pk, EvalSecretKey(CLEAR, secret, pk.fingerprint))

    def _ct(self, fp: str, bit: int) -> Ciphertext:
        return Ciphertext(bit, fp, CLEAR)

    def encrypt_bit(self, pk, bit, rng_seed=None) -> Ciphertext:
        return self._ct(pk.fingerprint, check_bit(bit))

    def trivial(self, pk, bit) -> Ciphertext:
        return self._ct(pk.fingerprint, check_bit(bit))

    def raw_decrypt(self, sk, ct) -> int:
        return ct.value & 1

    def eval_xor(self, a, b):
        same_key(a, b)
        return self._ct(a.key_fingerprint, a.value ^ b.value)

    def eval_and(self, a, b):
        same_key(a, b)
        return self._ct(a.key_fingerprint, a.value & b.value)

    def eval_not(self, pk: EvalPublicKey, a):
        if a.key_fingerprint != pk.fingerprint:
            raise KeyMismatch("NOT operand is not under the given public key")
        return self._ct(a.key_fingerprint, a.value ^ 1)

    def decryption_depth(self, pk) -> int:
        return 0
