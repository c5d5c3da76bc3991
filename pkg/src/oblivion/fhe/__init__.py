from oblivion.fhe.api import (
    check_key_switch,
    decrypt_bit,
    decrypt_bits,
    decryption_depth,
    encrypt_bit,
    encrypt_bits,
    eval_and,
    eval_not,
    eval_xor,
    evaluate,
    get_backend,
    key_switch,
    keygen,
    raw_decrypt_bits,
    secret_key_bits,
    trivial,
)
from oblivion.fhe.types import (
    BACKENDS,
    CLEAR,
    DEFAULT_PARAMS,
    SMALL_PARAMS,
    TOY,
    Ciphertext,
    EvalKeyPair,
    EvalPublicKey,
    EvalSecretKey,
    SchemeParams,
    derive_max_mult_depth,
    fresh_noise_bound,
)

__all__ = [
    "BACKENDS", "CLEAR", "DEFAULT_PARAMS", "SMALL_PARAMS", "TOY",
    "Ciphertext", "EvalKeyPair", "EvalPublicKey", "EvalSecretKey", "SchemeParams",
    "check_key_switch", "decrypt_bit", "decrypt_bits", "decryption_depth",
    "derive_max_mult_depth", "encrypt_bit", "encrypt_bits", "eval_and", "eval_not",
    "eval_xor", "evaluate", "fresh_noise_bound", "get_backend", "key_switch", "keygen",
    "raw_decrypt_bits", "secret_key_bits", "trivial",
]
