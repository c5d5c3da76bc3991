"""Backend-dispatching front end for the homomorphic operations."""

from __future__ import annotations

from typing import Sequence

from oblivion.circuit import Circuit, build_identity
from oblivion.errors import DepthExceeded, InvalidParams, KeyMismatch
from oblivion.fhe.base import Backend, as_rng
from oblivion.fhe.clear import ClearBackend
from oblivion.fhe.toy import ToyBackend
from oblivion.fhe.types import (
    CLEAR,
    DEFAULT_PARAMS,
    Ciphertext,
    EvalKeyPair,
    EvalPublicKey,
    EvalSecretKey,
    SchemeParams,
)

_BACKENDS: dict[str, Backend] = {CLEAR: ClearBackend(), "toy": ToyBackend()}


def get_backend(name: str) -> Backend:
    try:
        return _BACKENDS[name]
    except KeyError:
        raise InvalidParams(f"unknown backend {name!r}; choose from {sorted(_BACKENDS)}") from None


def keygen(params: SchemeParams | None = None, rng_seed=0, backend: str = "toy") -> EvalKeyPair:
    if backend != CLEAR and params is None:
        params = DEFAULT_PARAMS
    return get_backend(backend).keygen(params, rng_seed)


def encrypt_bit(pk: EvalPublicKey, bit: int, rng_seed=None) -> Ciphertext:
    return get_backend(pk.backend).encrypt_bit(pk, bit, rng_seed)


def encrypt_bits(pk: EvalPublicKey, bits: Sequence[int], rng_seed=None) -> list[Ciphertext]:
    rng = as_rng(rng_seed)
    backend = get_backend(pk.backend)
    return [backend.encrypt_bit(pk, b, rng.getrandbits(64)) for b in bits]


def decrypt_bit(sk: EvalSecretKey, ct: Ciphertext) -> int:
    return get_backend(ct.backend_id).decrypt_bit(sk, ct)


def decrypt_bits(sk: EvalSecretKey, cts: Sequence[Ciphertext]) -> list[int]:
    return [decrypt_bit(sk, ct) for ct in cts]


def raw_decrypt_bits(sk: EvalSecretKey, cts: Sequence[Ciphertext]) -> list[int]:
    """Decrypt ignoring key fingerprints (what an attacker holding ``sk`` would try)."""
    return [get_backend(sk.backend).raw_decrypt(sk, ct) for ct in cts]


def trivial(pk: EvalPublicKey, bit: int) -> Ciphertext:
    return get_backend(pk.backend).trivial(pk, bit)


def eval_xor(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    return get_backend(a.backend_id).eval_xor(a, b)


def eval_and(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    return get_backend(a.backend_id).eval_and(a, b)


def eval_not(pk: EvalPublicKey, a: Ciphertext) -> Ciphertext:
    return get_backend(a.backend_id).eval_not(pk, a)


def evaluate(pk: EvalPublicKey, func: Circuit, inputs: Sequence[Ciphertext]) -> list[Ciphertext]:
    return get_backend(pk.backend).evaluate(pk, func, list(inputs))


def decryption_depth(pk: EvalPublicKey) -> int:
    return get_backend(pk.backend).decryption_depth(pk)


def check_key_switch(old_pk: EvalPublicKey, new_pk: EvalPublicKey) -> None:
    """Static guard for homomorphic key switching from ``old_pk`` to ``new_pk``."""
    if old_pk.backend != new_pk.backend:
        raise KeyMismatch("key switching across backends is not supported")
    need = decryption_depth(old_pk)
    limit = new_pk.max_mult_depth
    if limit is not None and need > limit:
        raise DepthExceeded(
            f"decryption circuit of the old key needs depth ~{need}; new key supports {limit}"
        )


def secret_key_bits(sk: EvalSecretKey) -> list[int]:
    """Bits of the old secret fed (encrypted) into the decryption circuit."""
    if sk.backend == CLEAR:
        return []
    return [(sk.value >> i) & 1 for i in range(sk.value.bit_length())]


def key_switch(
    old_pk: EvalPublicKey,
    new_pk: EvalPublicKey,
    ct: Ciphertext,
    enc_secret_bits: Sequence[Ciphertext],
) -> Ciphertext:
    """Re-encrypt ``ct`` under ``new_pk`` by evaluating the old decryption circuit.

    The ciphertext's public value enters as noiseless constants under the new
    key, the old secret as ``enc_secret_bits``.  Only the clear backend has a
    decryption circuit shallow enough (the identity).
    """
    check_key_switch(old_pk, new_pk)
    if ct.key_fingerprint != old_pk.fingerprint:
        raise KeyMismatch("ciphertext is not under the old key")
    if old_pk.backend != CLEAR:
        raise DepthExceeded("no decryption circuit fits this backend's depth")
    public_bit = trivial(new_pk, ct.value & 1)
    (out,) = evaluate(new_pk, build_identity(1), [public_bit])
    return out
