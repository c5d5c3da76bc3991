"""Compilation of the access predicate to a circuit and its encrypted evaluation.

The compiled circuit depends only on the public policy shape (schema,
func-id width, func slots, rule count).  Rule values enter as encrypted
inputs, so the evaluating server never learns what any rule says.

Input order: request attribute bits (schema order), requested func-id bits,
then each rule's bits in the layout of :func:`encode_rule`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from oblivion.abac.model import (
    DEFAULT_FUNC_SLOTS,
    AttributeValue,
    EncryptedAttribute,
    PolicyRule,
    PolicyRuleBase,
    SchemaEntry,
    decode_rule,
    encode_rule,
    int_to_bits,
    rule_width,
    validate_schema,
)
from oblivion.circuit import Circuit, CircuitBuilder
from oblivion.errors import KeyMismatch, ShapeError
from oblivion.fhe import (
    Ciphertext,
    EvalPublicKey,
    EvalSecretKey,
    decrypt_bits,
    encrypt_bits,
    eval_and,
    evaluate,
)
from oblivion.fhe.base import as_rng


def compile_canaccess(
    schema: Sequence[SchemaEntry],
    func_id_width: int,
    rule_count: int,
    func_slots: int = DEFAULT_FUNC_SLOTS,
) -> Circuit:
    if rule_count < 0:
        raise ShapeError("rule_count must be non-negative")
    validate_schema(schema, func_id_width, func_slots)
    n_req = sum(e.width for e in schema)
    per_rule = rule_width(schema, func_id_width, func_slots)
    b = CircuitBuilder(n_req + func_id_width + rule_count * per_rule)

    attr_wires = []
    pos = 0
    for e in schema:
        attr_wires.append(list(range(pos, pos + e.width)))
        pos += e.width
    fid = list(range(pos, pos + func_id_width))
    pos += func_id_width

    granted = []
    for _ in range(rule_count):
        terms = [pos]  # enabled
        pos += 1
        for e, req in zip(schema, attr_wires):
            care, vals = pos, range(pos + 1, pos + 1 + e.width)
            pos += 1 + e.width
            # per bit: NOT(care AND (request XOR rule value))
            for x, v in zip(req, vals):
                terms.append(b.not_(b.and_(care, b.xor(x, v))))
        alternatives = [pos]  # any-func
        pos += 1
        for _ in range(func_slots):
            valid, ids = pos, range(pos + 1, pos + 1 + func_id_width)
            pos += 1 + func_id_width
            alternatives.append(b.and_tree([valid] + [b.xnor(f, g) for f, g in zip(fid, ids)]))
        terms.append(b.or_tree(alternatives))
        granted.append(b.and_tree(terms))
    return b.build([b.or_tree(granted)])


def compile_for(prb: "PolicyRuleBase | EncryptedPRB") -> Circuit:
    return compile_canaccess(prb.schema, prb.func_id_width, len(prb.rules), prb.func_slots)


def request_bits(
    schema: Sequence[SchemaEntry], attrs: Mapping[str, Sequence[int]], func_id: int, func_id_width: int
) -> list[int]:
    out: list[int] = []
    for e in schema:
        if e.name not in attrs:
            raise ShapeError(f"request lacks attribute {e.name!r}")
        bits = list(attrs[e.name])
        if len(bits) != e.width:
            raise ShapeError(f"attribute {e.name}: expected {e.width} bits, got {len(bits)}")
        out.extend(bits)
    out.extend(int_to_bits(func_id, func_id_width))
    return out


def prb_bits(prb: PolicyRuleBase, pad_to: int | None = None) -> list[list[int]]:
    rules: list = list(prb.rules)
    if pad_to is not None:
        if pad_to < len(rules):
            raise ShapeError(f"cannot pad {len(rules)} rules down to {pad_to}")
        rules += [None] * (pad_to - len(rules))
    return [encode_rule(r, prb.schema, prb.func_id_width, prb.func_slots) for r in rules]


@dataclass(frozen=True)
class EncryptedPRB:
    """Policy rule base with public shape and bitwise-encrypted rule values."""

    schema: tuple[SchemaEntry, ...]
    func_id_width: int
    func_slots: int
    identity: str | None
    rules: tuple[tuple[Ciphertext, ...], ...]
    key_fingerprint: str

    def __post_init__(self):
        width = rule_width(self.schema, self.func_id_width, self.func_slots)
        for k, r in enumerate(self.rules):
            if len(r) != width:
                raise ShapeError(f"encrypted rule {k} has {len(r)} bits, layout needs {width}")
            for ct in r:
                if ct.key_fingerprint != self.key_fingerprint:
                    raise KeyMismatch(f"encrypted rule {k} mixes keys")

    @property
    def shape(self) -> tuple:
        return (self.schema, self.func_id_width, self.func_slots, self.identity, len(self.rules))


def encrypt_attributes(
    eval_pk: EvalPublicKey, attrs: Sequence[AttributeValue], rng_seed=None
) -> list[EncryptedAttribute]:
    rng = as_rng(rng_seed)
    return [
        EncryptedAttribute(a.name, tuple(encrypt_bits(eval_pk, a.bits, rng)), a.category)
        for a in attrs
    ]


def encrypt_prb(eval_pk: EvalPublicKey, prb: PolicyRuleBase, rng_seed=None, pad_to: int | None = None) -> EncryptedPRB:
    """Encrypt every rule bit under ``eval_pk``; ``pad_to`` appends disabled rules to hide the count."""
    rng = as_rng(rng_seed)
    rules = tuple(tuple(encrypt_bits(eval_pk, bits, rng)) for bits in prb_bits(prb, pad_to))
    return EncryptedPRB(prb.schema, prb.func_id_width, prb.func_slots, prb.identity, rules, eval_pk.fingerprint)


def decrypt_prb(eval_sk: EvalSecretKey, eprb: EncryptedPRB) -> PolicyRuleBase:
    rules = []
    for r in eprb.rules:
        rule = decode_rule(decrypt_bits(eval_sk, r), eprb.schema, eprb.func_id_width, eprb.func_slots)
        if rule is not None:
            rules.append(rule)
    return PolicyRuleBase(eprb.schema, eprb.func_id_width, tuple(rules), eprb.func_slots, eprb.identity)


def access_inputs(
    canaccess: Circuit,
    enc_attrs: Sequence[EncryptedAttribute] | Mapping[str, EncryptedAttribute],
    enc_func_id: Sequence[Ciphertext],
    enc_prb: EncryptedPRB,
) -> list[Ciphertext]:
    if not isinstance(enc_attrs, Mapping):
        enc_attrs = {a.name: a for a in enc_attrs}
    inputs: list[Ciphertext] = []
    for e in enc_prb.schema:
        attr = enc_attrs.get(e.name)
        if attr is None:
            raise ShapeError(f"request lacks attribute {e.name!r}")
        if len(attr.ciphertexts) != e.width:
            raise ShapeError(f"attribute {e.name}: expected {e.width} ciphertexts, got {len(attr.ciphertexts)}")
        inputs.extend(attr.ciphertexts)
    if len(enc_func_id) != enc_prb.func_id_width:
        raise ShapeError(f"func id needs {enc_prb.func_id_width} ciphertexts, got {len(enc_func_id)}")
    inputs.extend(enc_func_id)
    for r in enc_prb.rules:
        inputs.extend(r)
    if len(inputs) != canaccess.num_inputs:
        raise ShapeError(
            f"access circuit takes {canaccess.num_inputs} inputs but the request and PRB supply {len(inputs)}"
        )
    return inputs


def verify_access(
    eval_pk: EvalPublicKey,
    canaccess: Circuit,
    enc_attrs,
    enc_func_id: Sequence[Ciphertext],
    enc_prb: EncryptedPRB,
) -> Ciphertext:
    """Encrypted access decision; the evaluator never sees its value."""
    (decision,) = evaluate(eval_pk, canaccess, access_inputs(canaccess, enc_attrs, enc_func_id, enc_prb))
    return decision


def gate_output(eval_pk: EvalPublicKey, decision: Ciphertext, outputs: Sequence[Ciphertext]) -> list[Ciphertext]:
    """AND every output bit with the decision: denied results decrypt to all zeros."""
    if decision.key_fingerprint != eval_pk.fingerprint:
        raise KeyMismatch("decision is not under the evaluation key")
    return [eval_and(decision, o) for o in outputs]


def random_prb(
    rng: random.Random,
    schema: Sequence[SchemaEntry],
    func_id_width: int,
    rule_count: int,
    func_slots: int = DEFAULT_FUNC_SLOTS,
    max_predicates: int | None = None,
) -> PolicyRuleBase:
    """Random well-formed PRB of the given shape (used by sweeps and demos)."""
    rules = []
    limit = len(schema) if max_predicates is None else min(max_predicates, len(schema))
    for _ in range(rule_count):
        while True:
            n_pred = rng.randint(0, limit)
            chosen = rng.sample(list(schema), n_pred)
            preds = tuple((e.name, tuple(rng.getrandbits(1) for _ in range(e.width))) for e in chosen)
            n_func = rng.randint(0, func_slots)
            funcs = frozenset(rng.randrange(1 << func_id_width) for _ in range(n_func))
            if preds or funcs:
                break
        rules.append(PolicyRule(preds, funcs))
    return PolicyRuleBase(tuple(schema), func_id_width, tuple(rules), func_slots)
