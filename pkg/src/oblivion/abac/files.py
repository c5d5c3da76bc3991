"""PRB text files, plaintext and encrypted.

Plaintext::

    schema:
      subject.id 8 subject
      resource.name 4 resource
    func_id_width: 4
    func_slots: 2
    identity: subject.id
    rule:
      predicate subject.id = @bob
      predicate resource.name = 5
      permit func 1

Values are hex integers (little-endian bit order once expanded).  ``@name``
stands for the subject fingerprint of principal ``name`` and is resolved
through the ``principals`` mapping passed to :func:`parse_prb`.
"""

from __future__ import annotations

from typing import Callable, Mapping

from oblivion.abac.model import (
    DEFAULT_FUNC_SLOTS,
    PolicyRule,
    PolicyRuleBase,
    SchemaEntry,
    bits_to_int,
    fingerprint_subject,
    int_to_bits,
    rule_width,
)
from oblivion.abac.oblivious import EncryptedPRB
from oblivion.authsig import AuthPublicKey
from oblivion.errors import OblivionError, ParseError
from oblivion.fhe import EvalPublicKey
from oblivion.fhe.io import dump_ciphertexts, load_ciphertexts


def parse_prb(
    text: str,
    principals: Mapping[str, AuthPublicKey] | Callable[[str], AuthPublicKey] | None = None,
    source: str | None = None,
) -> PolicyRuleBase:
    schema: list[SchemaEntry] = []
    func_id_width = None
    func_slots = DEFAULT_FUNC_SLOTS
    identity = None
    rules: list[tuple[list, list, int]] = []
    section = None

    def lookup(name: str, lineno: int) -> AuthPublicKey:
        try:
            if callable(principals):
                return principals(name)
            if principals is not None:
                return principals[name]
        except KeyError:
            pass
        raise ParseError(f"unknown principal @{name}", lineno, source)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "schema:":
            section = "schema"
            continue
        if line == "rule:":
            section = "rule"
            rules.append(([], [], lineno))
            continue
        key, sep, val = line.partition(":")
        if sep and key in ("func_id_width", "func_slots", "identity"):
            val = val.strip()
            if key == "identity":
                identity = val
            else:
                try:
                    n = int(val)
                except ValueError:
                    raise ParseError(f"{key} must be an integer", lineno, source) from None
                if key == "func_id_width":
                    func_id_width = n
                else:
                    func_slots = n
            section = None
            continue
        parts = line.split()
        if section == "schema":
            if len(parts) != 3:
                raise ParseError("schema line needs: <name> <width> <category>", lineno, source)
            try:
                schema.append(SchemaEntry(parts[0], int(parts[1]), parts[2]))
            except (ValueError, OblivionError) as exc:
                raise ParseError(str(exc), lineno, source) from None
        elif section == "rule":
            if parts[0] == "predicate" and len(parts) == 4 and parts[2] == "=":
                rules[-1][0].append((parts[1], parts[3], lineno))
            elif parts[:2] == ["permit", "func"] and len(parts) == 3:
                try:
                    rules[-1][1].append(int(parts[2], 16))
                except ValueError:
                    raise ParseError(f"bad func id {parts[2]!r}", lineno, source) from None
            else:
                raise ParseError(f"cannot parse rule line {line!r}", lineno, source)
        else:
            raise ParseError(f"unexpected line {line!r}", lineno, source)

    if func_id_width is None:
        raise ParseError("missing func_id_width", None, source)
    widths = {e.name: e.width for e in schema}
    built = []
    for preds, funcs, rule_line in rules:
        out = []
        for name, value, lineno in preds:
            if name not in widths:
                raise ParseError(f"unknown attribute {name!r}", lineno, source)
            try:
                if value.startswith("@"):
                    bits = fingerprint_subject(lookup(value[1:], lineno), widths[name], name).bits
                else:
                    bits = int_to_bits(int(value, 16), widths[name])
            except ParseError:
                raise
            except (ValueError, OblivionError) as exc:
                raise ParseError(str(exc), lineno, source) from None
            out.append((name, bits))
        try:
            built.append(PolicyRule(tuple(out), frozenset(funcs)))
        except OblivionError as exc:
            raise ParseError(str(exc), rule_line, source) from None
    try:
        return PolicyRuleBase(tuple(schema), func_id_width, tuple(built), func_slots, identity)
    except OblivionError as exc:
        raise ParseError(str(exc), None, source) from None


def _shape_lines(schema, func_id_width, func_slots, identity) -> list[str]:
    lines = ["schema:"]
    lines += [f"  {e.name} {e.width} {e.category}" for e in schema]
    lines.append(f"func_id_width: {func_id_width}")
    lines.append(f"func_slots: {func_slots}")
    if identity:
        lines.append(f"identity: {identity}")
    return lines


def dump_prb(prb: PolicyRuleBase) -> str:
    lines = _shape_lines(prb.schema, prb.func_id_width, prb.func_slots, prb.identity)
    for rule in prb.rules:
        lines.append("rule:")
        for name, bits in rule.predicates:
            lines.append(f"  predicate {name} = {bits_to_int(bits):x}")
        for f in sorted(rule.permitted_funcs):
            lines.append(f"  permit func {f:x}")
    return "\n".join(lines) + "\n"


EPRB_HEADER = "OBLIVION-EPRB v1"


def dump_encrypted_prb(eprb: EncryptedPRB) -> str:
    lines = [f"{EPRB_HEADER}; rules={len(eprb.rules)}; fingerprint={eprb.key_fingerprint}"]
    lines += _shape_lines(eprb.schema, eprb.func_id_width, eprb.func_slots, eprb.identity)
    lines.append("ciphertexts:")
    flat = [ct for rule in eprb.rules for ct in rule]
    return "\n".join(lines) + "\n" + dump_ciphertexts(flat)


def load_encrypted_prb(text: str, pk: EvalPublicKey | None = None, source: str | None = None) -> EncryptedPRB:
    head, sep, body = text.partition("ciphertexts:\n")
    if not sep:
        raise ParseError("missing 'ciphertexts:' section", None, source)
    first, _, shape_text = head.partition("\n")
    if not first.startswith(EPRB_HEADER):
        raise ParseError(f"expected '{EPRB_HEADER}' header", 1, source)
    attrs = dict(p.strip().partition("=")[::2] for p in first.split(";")[1:])
    try:
        n_rules = int(attrs["rules"])
        fp = attrs["fingerprint"]
    except (KeyError, ValueError):
        raise ParseError("header needs rules=<n> and fingerprint=<hex>", 1, source) from None
    shape = parse_prb(shape_text, source=source)
    cts = load_ciphertexts(body, pk, source)
    width = rule_width(shape.schema, shape.func_id_width, shape.func_slots)
    if len(cts) != n_rules * width:
        raise ParseError(f"expected {n_rules * width} ciphertexts, found {len(cts)}", None, source)
    rules = tuple(tuple(cts[i * width : (i + 1) * width]) for i in range(n_rules))
    return EncryptedPRB(shape.schema, shape.func_id_width, shape.func_slots, shape.identity, rules, fp)
