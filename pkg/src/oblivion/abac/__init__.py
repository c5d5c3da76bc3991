from oblivion.abac.files import dump_encrypted_prb, dump_prb, load_encrypted_prb, parse_prb
from oblivion.abac.model import (
    CATEGORIES,
    DEFAULT_FUNC_SLOTS,
    ENVIRONMENT,
    IDENTITY_ATTRIBUTE,
    RESOURCE,
    SUBJECT,
    AttributeValue,
    EncryptedAttribute,
    PolicyRule,
    PolicyRuleBase,
    SchemaEntry,
    bits_to_int,
    fingerprint_subject,
    int_to_bits,
    rule_width,
)
from oblivion.abac.oblivious import (
    EncryptedPRB,
    access_inputs,
    compile_canaccess,
    compile_for,
    decrypt_prb,
    encrypt_attributes,
    encrypt_prb,
    gate_output,
    prb_bits,
    random_prb,
    request_bits,
    verify_access,
)

__all__ = [
    "AttributeValue",
    "CATEGORIES",
    "DEFAULT_FUNC_SLOTS",
    "ENVIRONMENT",
    "EncryptedAttribute",
    "EncryptedPRB",
    "IDENTITY_ATTRIBUTE",
    "PolicyRule",
    "PolicyRuleBase",
    "RESOURCE",
    "SUBJECT",
    "SchemaEntry",
    "access_inputs",
    "bits_to_int",
    "compile_canaccess",
    "compile_for",
    "decrypt_prb",
    "dump_encrypted_prb",
    "dump_prb",
    "encrypt_attributes",
    "encrypt_prb",
    "fingerprint_subject",
    "gate_output",
    "int_to_bits",
    "load_encrypted_prb",
    "parse_prb",
    "prb_bits",
    "random_prb",
    "request_bits",
    "rule_width",
    "verify_access",
]
