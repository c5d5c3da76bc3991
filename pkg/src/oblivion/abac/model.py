"""Attribute and policy-rule-base data model with its plaintext decision oracle."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from oblivion.authsig import AuthPublicKey
from oblivion.errors import ShapeError, WidthTooLarge
from oblivion.fhe import Ciphertext

SUBJECT = "subject"
RESOURCE = "resource"
ENVIRONMENT = "environment"
CATEGORIES = (SUBJECT, RESOURCE, ENVIRONMENT)

DEFAULT_FUNC_SLOTS = 2
IDENTITY_ATTRIBUTE = "subject.id"


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    if value < 0 or value >> width:
        raise ShapeError(f"value {value:#x} does not fit in {width} bits")
    return tuple((value >> i) & 1 for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


@dataclass(frozen=True)
class AttributeValue:
    name: str
    width: int
    bits: tuple[int, ...]
    category: str = SUBJECT

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.bits) != self.width:
            raise ShapeError(f"attribute {self.name}: {len(self.bits)} bits for width {self.width}")
        if any(b not in (0, 1) for b in self.bits):
            raise ShapeError(f"attribute {self.name}: values must be bits")
        if self.category not in CATEGORIES:
            raise ShapeError(f"attribute {self.name}: unknown category {self.category!r}")

    @classmethod
    def from_int(cls, name: str, width: int, value: int, category: str = SUBJECT) -> "AttributeValue":
        return cls(name, width, int_to_bits(value, width), category)

    @property
    def value(self) -> int:
        return bits_to_int(self.bits)


@dataclass(frozen=True)
class EncryptedAttribute:
    name: str
    ciphertexts: tuple[Ciphertext, ...]
    category: str = SUBJECT


def fingerprint_subject(
    pk: AuthPublicKey, width: int, name: str = IDENTITY_ATTRIBUTE
) -> AttributeValue:
    """Low ``width`` bits of SHA-256 over the serialized auth public key.

    Two distinct keys collide with probability ``2**-width``; at width 32 a
    population of 100 keys collides with probability about 1.2e-6.
    """
    if not 1 <= width <= 256:
        raise WidthTooLarge(f"width must be between 1 and 256, got {width}")
    digest = int.from_bytes(hashlib.sha256(pk.to_bytes()).digest(), "little")
    return AttributeValue.from_int(name, width, digest & ((1 << width) - 1), SUBJECT)


@dataclass(frozen=True)
class SchemaEntry:
    name: str
    width: int
    category: str

    def __post_init__(self):
        if self.width < 1:
            raise ShapeError(f"schema attribute {self.name}: width must be positive")
        if self.category not in CATEGORIES:
            raise ShapeError(f"schema attribute {self.name}: unknown category {self.category!r}")


def validate_schema(schema: Sequence[SchemaEntry], func_id_width: int, func_slots: int) -> None:
    names = [e.name for e in schema]
    if len(set(names)) != len(names):
        raise ShapeError("schema has duplicate attribute names")
    if func_id_width < 1:
        raise ShapeError("func_id_width must be positive")
    if func_slots < 0:
        raise ShapeError("func_slots must be non-negative")


@dataclass(frozen=True)
class PolicyRule:
    """Conjunction of attribute equalities, restricted to a set of functions.

    An empty ``permitted_funcs`` means the rule allows every function.
    """

    predicates: tuple[tuple[str, tuple[int, ...]], ...] = ()
    permitted_funcs: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        preds = tuple((n, tuple(int(b) for b in bits)) for n, bits in self.predicates)
        object.__setattr__(self, "predicates", preds)
        object.__setattr__(self, "permitted_funcs", frozenset(int(f) for f in self.permitted_funcs))
        if not preds and not self.permitted_funcs:
            raise ShapeError("a rule needs at least one predicate or one permitted function")
        names = [n for n, _ in preds]
        if len(set(names)) != len(names):
            raise ShapeError("a rule may constrain each attribute at most once")

    def matches(self, attrs: Mapping[str, Sequence[int]], func_id: int) -> bool:
        for name, bits in self.predicates:
            if tuple(attrs[name]) != bits:
                return False
        return not self.permitted_funcs or func_id in self.permitted_funcs


@dataclass(frozen=True)
class PolicyRuleBase:
    schema: tuple[SchemaEntry, ...]
    func_id_width: int
    rules: tuple[PolicyRule, ...] = ()
    func_slots: int = DEFAULT_FUNC_SLOTS
    identity: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "rules", tuple(self.rules))
        validate_schema(self.schema, self.func_id_width, self.func_slots)
        widths = {e.name: e.width for e in self.schema}
        order = {e.name: i for i, e in enumerate(self.schema)}
        object.__setattr__(self, "rules", tuple(
            PolicyRule(
                tuple(sorted(r.predicates, key=lambda p: order.get(p[0], len(order)))),
                r.permitted_funcs,
            )
            for r in self.rules
        ))
        if self.identity is not None and self.identity not in widths:
            raise ShapeError(f"identity attribute {self.identity!r} is not in the schema")
        for k, rule in enumerate(self.rules):
            for name, bits in rule.predicates:
                if name not in widths:
                    raise ShapeError(f"rule {k}: unknown attribute {name!r}")
                if len(bits) != widths[name]:
                    raise ShapeError(f"rule {k}: {name} needs {widths[name]} bits, got {len(bits)}")
            if len(rule.permitted_funcs) > self.func_slots:
                raise ShapeError(f"rule {k}: {len(rule.permitted_funcs)} permitted funcs exceed {self.func_slots} slots")
            for f in rule.permitted_funcs:
                if not 0 <= f < (1 << self.func_id_width):
                    raise ShapeError(f"rule {k}: func id {f} does not fit {self.func_id_width} bits")

    def entry(self, name: str) -> SchemaEntry:
        for e in self.schema:
            if e.name == name:
                return e
        raise ShapeError(f"unknown attribute {name!r}")

    def decide(self, attrs: Mapping[str, Sequence[int]], func_id: int) -> bool:
        """Plaintext ABAC verdict: does any rule grant ``func_id`` to ``attrs``?"""
        return any(rule.matches(attrs, func_id) for rule in self.rules)

    def replace_rules(self, rules: Sequence[PolicyRule]) -> "PolicyRuleBase":
        return PolicyRuleBase(self.schema, self.func_id_width, tuple(rules), self.func_slots, self.identity)


def rule_width(schema: Sequence[SchemaEntry], func_id_width: int, func_slots: int) -> int:
    """Bits per rule: enabled, (care + value) per attribute, any-func, (valid + id) per slot."""
    return 1 + sum(1 + e.width for e in schema) + 1 + func_slots * (1 + func_id_width)


def encode_rule(rule: PolicyRule | None, schema, func_id_width: int, func_slots: int) -> list[int]:
    """Plaintext bit layout of one rule; ``None`` encodes a disabled padding rule."""
    if rule is None:
        return [0] * rule_width(schema, func_id_width, func_slots)
    preds = dict(rule.predicates)
    out = [1]
    for e in schema:
        if e.name in preds:
            out.append(1)
            out.extend(preds[e.name])
        else:
            out.extend([0] * (1 + e.width))
    out.append(0 if rule.permitted_funcs else 1)
    funcs = sorted(rule.permitted_funcs)
    for j in range(func_slots):
        if j < len(funcs):
            out.append(1)
            out.extend(int_to_bits(funcs[j], func_id_width))
        else:
            out.extend([0] * (1 + func_id_width))
    return out


def decode_rule(bits: Sequence[int], schema, func_id_width: int, func_slots: int) -> PolicyRule | None:
    bits = list(bits)
    if not bits[0]:
        return None
    pos = 1
    preds = []
    for e in schema:
        care = bits[pos]
        if care:
            preds.append((e.name, tuple(bits[pos + 1 : pos + 1 + e.width])))
        pos += 1 + e.width
    any_func = bits[pos]
    pos += 1
    funcs = []
    for _ in range(func_slots):
        if bits[pos]:
            funcs.append(bits_to_int(bits[pos + 1 : pos + 1 + func_id_width]))
        pos += 1 + func_id_width
    if any_func:
        funcs = []
    return PolicyRule(tuple(preds), frozenset(funcs))
