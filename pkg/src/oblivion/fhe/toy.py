"""Somewhat-homomorphic encryption over the integers (DGHV style).

Secret: an odd integer ``p`` of exactly ``secret_bits`` bits.  Public key:
``x0 = p*q0`` (noise free, used as the reduction modulus) followed by
``pk_elements - 1`` noisy encryptions of zero ``x_i = p*q_i + 2*r_i``.

    encrypt(m) = (m + 2r + sum of a random subset of x_i) mod x0
    decrypt(c) = (c mod p) mod 2

All noise terms are non-negative, so ``c mod p`` equals the accumulated
noise while that noise stays below ``p``.  Parameters are far too small for
real security; the point is an honest depth/noise contract.
"""

from __future__ import annotations

import math
from functools import lru_cache

from oblivion.errors import InvalidParams, KeyMismatch
from oblivion.fhe.base import Backend, as_rng, check_bit, same_key
from oblivion.fhe.types import (
    MULTIPLIER_BITS,
    TOY,
    Ciphertext,
    EvalKeyPair,
    EvalPublicKey,
    EvalSecretKey,
    SchemeParams,
    fresh_noise_bound,
)


class ToyBackend(Backend):
    name = TOY

    def keygen(self, params: SchemeParams | None, rng_seed) -> EvalKeyPair:
        if params is None:
            raise InvalidParams("the toy backend needs SchemeParams")
        if isinstance(rng_seed, int):
            return _keygen_cached(params, rng_seed)
        return _keygen(params, as_rng(rng_seed))

    def encrypt_bit(self, pk: EvalPublicKey, bit, rng_seed) -> Ciphertext:
        m = check_bit(bit)
        params = pk.params
        rng = as_rng(rng_seed)
        c = m + 2 * rng.getrandbits(params.noise_bits)
        for x in pk.elements[1:]:
            if rng.getrandbits(1):
                c += x
        return Ciphertext(
            c % pk.modulus,
            pk.fingerprint,
            TOY,
            fresh_noise_bound(params.noise_bits, params.pk_elements),
            params.secret_bits,
            pk.modulus,
        )

    def trivial(self, pk: EvalPublicKey, bit) -> Ciphertext:
        return Ciphertext(check_bit(bit), pk.fingerprint, TOY, 1, pk.params.secret_bits, pk.modulus)

    def raw_decrypt(self, sk: EvalSecretKey, ct: Ciphertext) -> int:
        return (ct.value % sk.value) & 1

    @staticmethod
    def _derive(a: Ciphertext, value: int, bound: int) -> Ciphertext:
        cap = 1 << (2 * a.secret_bits)
        return Ciphertext(value, a.key_fingerprint, TOY, min(bound, cap), a.secret_bits, a.modulus)

    def eval_xor(self, a, b):
        same_key(a, b)
        return self._derive(a, (a.value + b.value) % a.modulus, a.noise_bound + b.noise_bound)

    def eval_and(self, a, b):
        same_key(a, b)
        return self._derive(a, (a.value * b.value) % a.modulus, a.noise_bound * b.noise_bound)

    def eval_not(self, pk, a):
        if a.key_fingerprint != pk.fingerprint:
            raise KeyMismatch("NOT operand is not under the given public key")
        return self._derive(a, (a.value + 1) % a.modulus, a.noise_bound + 1)

    def decryption_depth(self, pk: EvalPublicKey) -> int:
        """Estimated AND depth of evaluating ``(c mod p) mod 2`` as a circuit.

        Partial products (1) + a 3:2 carry-save reduction tree over ``gamma``
        rows (log base 1.5) + a log-depth carry-lookahead final adder.
        """
        gamma = pk.modulus.bit_length()
        return 1 + math.ceil(math.log(gamma, 1.5)) + math.ceil(math.log2(gamma))


def _keygen(params: SchemeParams, rng) -> EvalKeyPair:
    eta = params.secret_bits
    p = rng.getrandbits(eta) | (1 << (eta - 1)) | 1
    q0 = rng.getrandbits(MULTIPLIER_BITS) | (1 << (MULTIPLIER_BITS - 1))
    elements = [p * q0]
    for _ in range(params.pk_elements - 1):
        q = rng.randrange(1, q0)
        r = rng.getrandbits(params.noise_bits)
        elements.append(p * q + 2 * r)
    pk = EvalPublicKey(TOY, params, tuple(elements))
    pair = EvalKeyPair(pk, EvalSecretKey(TOY, p, pk.fingerprint, params))
    _self_test(pair, rng)
    return pair


@lru_cache(maxsize=64)
def _keygen_cached(params: SchemeParams, seed: int) -> EvalKeyPair:
    return _keygen(params, as_rng(seed))


def _self_test(pair: EvalKeyPair, rng) -> None:
    """Balanced AND trees of depth max_mult_depth must still decrypt."""
    backend = ToyBackend()
    pk, sk = pair.public, pair.secret
    depth = pk.params.max_mult_depth
    for zero_leaf in (False, True):
        leaves = [backend.encrypt_bit(pk, 1, rng.getrandbits(64)) for _ in range(1 << depth)]
        if zero_leaf:
            leaves[0] = backend.encrypt_bit(pk, 0, rng.getrandbits(64))
        while len(leaves) > 1:
            leaves = [backend.eval_and(leaves[i], leaves[i + 1]) for i in range(0, len(leaves), 2)]
        expected = 0 if zero_leaf else 1
        if backend.decrypt_bit(sk, leaves[0]) != expected or leaves[0].noise_budget <= 0:
            raise InvalidParams(
                f"self-test failed: depth-{depth} AND tree does not decrypt under these parameters"
            )
