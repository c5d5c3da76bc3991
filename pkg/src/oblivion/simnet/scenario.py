"""Scenario files: setup, a script of actions, and the expected outcome of each.

A scenario is a JSON object::

    {"name": ..., "protocol": "basic" | "mssp" | "mcsp", "backend": "toy" | "clear",
     "params": "secret_bits,noise_bits,pk_elements" (optional), "signed": bool (basic only),
     "principals": [{"id": ..., "auth_seed": n, "admin": bool}],
     "server": {"id": ..., "auth_seed": n},
     "keys": {"eval_seed": n},
     "functions": [{"id": n, "builder": name, "width": w} | {"id": n, "file": path}],
     "data": [{"name": ..., "owner": principal, "bits": [...]}],
     "prb": {"file": path} | {"inline": text},
     "adversary": {"capabilities": [...], "steal_auth_sk": principal, "seed": n},
     "script": [{"action": ..., ..., "expect": outcome}]}

Each action yields an outcome string; an action passes when it equals the
expectation (``"ok"`` when omitted).  Rejections surface as the error class
name, gated denials as ``"denied"``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from oblivion.abac import AttributeValue, PolicyRuleBase, fingerprint_subject, parse_prb
from oblivion.authsig import auth_keygen
from oblivion.circuit import Circuit, build_named, eval_plain, parse
from oblivion.cloudserver import CloudServer
from oblivion.errors import KeyMismatch, OblivionError, ScenarioError
from oblivion.fhe import (
    BACKENDS,
    EvalKeyPair,
    SchemeParams,
    decrypt_bits,
    keygen,
    raw_decrypt_bits,
)
from oblivion.protocol import (
    PROTOCOLS,
    STRATEGIES,
    DeniedSentinel,
    ServerAgent,
    UserAgent,
    basic_run,
    distribute_eval_keys,
    mcsp_prb_upload,
    mcsp_run,
    mssp_run,
    reencrypt_data,
    revoke_user,
    rotate_auth_key,
    upload,
)
from oblivion.simnet.adversary import AdversaryConfig, Mallory, leakage_verdict
from oblivion.simnet.bus import Bus, Transcript

OK = "ok"
DENIED = "denied"
MISMATCH = "mismatch"


@dataclass
class StepResult:
    index: int
    action: str
    actor: str
    outcome: str
    expected: str
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.outcome == self.expected

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        shown = self.outcome
        if self.passed and self.expected != OK:
            shown += " (expected)"
        elif not self.passed:
            shown += f" (expected {self.expected})"
        return f"{verdict} step {self.index} {self.action} {self.actor}: {shown}"


@dataclass
class ScenarioResult:
    name: str
    transcript: Transcript
    steps: list[StepResult]
    server: ServerAgent | None = None

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "transcript_sha256": self.transcript.digest(),
            "steps": [
                {
                    "index": s.index,
                    "action": s.action,
                    "actor": s.actor,
                    "outcome": s.outcome,
                    "expected": s.expected,
                    "passed": s.passed,
                    **s.detail,
                }
                for s in self.steps
            ],
        }

    def write(self, out_dir: str | os.PathLike) -> list[Path]:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        tr = d / "transcript.jsonl"
        tr.write_text(self.transcript.to_jsonl())
        sm = d / "summary.json"
        sm.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return [tr, sm]


def load_scenario(path: str | os.PathLike) -> dict:
    p = Path(path)
    try:
        spec = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(spec, dict):
        raise ScenarioError(f"{p}: top level must be an object")
    spec.setdefault("_base", str(p.parent))
    return spec


def _need(d: dict, key: str, step: int | None = None):
    if key not in d:
        raise ScenarioError(f"missing field {key!r}", step)
    return d[key]


class _Run:
    def __init__(self, spec: dict, backend: str | None, params: SchemeParams | None):
        self.spec = spec
        self.base = Path(spec.get("_base", "."))
        self.name = spec.get("name", "scenario")
        self.protocol = spec.get("protocol", "mssp")
        if self.protocol not in PROTOCOLS:
            raise ScenarioError(f"unknown protocol {self.protocol!r}")
        self.backend = backend or spec.get("backend", "toy")
        if self.backend not in BACKENDS:
            raise ScenarioError(f"unknown backend {self.backend!r}")
        if params is None and spec.get("params"):
            params = SchemeParams.parse(spec["params"])
        self.params = params if self.backend != "clear" else None
        self.signed = bool(spec.get("signed", self.protocol != "basic"))
        self.bus = Bus(Transcript())
        self.plain: dict[int, tuple[int, ...]] = {}  # handle -> plaintext, the driver's oracle
        self._setup()

    # -- setup -------------------------------------------------------------

    def _keygen(self, seed: int) -> EvalKeyPair:
        return keygen(self.params, seed, self.backend)

    def _setup(self) -> None:
        spec = self.spec
        principals = _need(spec, "principals")
        if not principals:
            raise ScenarioError("at least one principal is required")
        self.users: dict[str, UserAgent] = {}
        for p in principals:
            pid = _need(p, "id")
            if pid in self.users or pid == "mallory":
                raise ScenarioError(f"duplicate or reserved principal id {pid!r}")
            self.users[pid] = UserAgent(
                pid, auth_keygen(int(_need(p, "auth_seed")), pid), None, bool(p.get("admin")), int(p.get("seed", 0))
            )
        admins = [u for u in self.users.values() if u.is_admin]
        if len(admins) != 1:
            raise ScenarioError(f"exactly one administrator is required, found {len(admins)}")
        self.admin = admins[0]

        eval_seed = int(spec.get("keys", {}).get("eval_seed", 0))
        keys = self._keygen(eval_seed)
        if self.protocol == "basic":
            # the owner's own pair doubles as the evaluation pair
            distribute_eval_keys(keys, [self.admin])
        else:
            distribute_eval_keys(keys, list(self.users.values()))

        srv = spec.get("server", {})
        server_auth = auth_keygen(int(srv.get("auth_seed", 0)), srv.get("id", "sally"))
        cloud = CloudServer(keys.public, self.admin.principal_id)
        for u in self.users.values():
            u.server_auth = server_auth.public
            if self.protocol != "basic" or u is self.admin:
                cloud.principals[u.principal_id] = u.auth.public
        self.admin.directory = {u.principal_id: u.auth.public for u in self.users.values()}
        self.server = ServerAgent(server_auth.principal_id, server_auth, cloud, self.protocol, self.signed)

        self.funcs: dict[int, Circuit] = {}
        for f in spec.get("functions", []):
            fid = int(_need(f, "id"))
            if "builder" in f:
                try:
                    circ = build_named(f["builder"], int(f.get("width", 1)))
                except (KeyError, ValueError) as exc:
                    raise ScenarioError(f"function {fid}: {exc}") from None
            elif "file" in f:
                path = self.base / f["file"]
                try:
                    circ = parse(path.read_text(), str(path))
                except OSError as exc:
                    raise ScenarioError(f"function {fid}: {exc}") from None
            else:
                raise ScenarioError(f"function {fid} needs 'builder' or 'file'")
            self.funcs[fid] = circ
            cloud.functions.register_func(fid, circ)

        self.data: dict[str, tuple[str, tuple[int, ...]]] = {}
        for d in spec.get("data", []):
            owner = _need(d, "owner")
            if owner not in self.users:
                raise ScenarioError(f"data {d.get('name')!r}: unknown owner {owner!r}")
            self.data[_need(d, "name")] = (owner, tuple(int(b) for b in _need(d, "bits")))

        self.prb: PolicyRuleBase | None = None
        if "prb" in spec:
            src = spec["prb"]
            if "inline" in src:
                text, where = src["inline"], f"{self.name}:prb"
            else:
                path = self.base / _need(src, "file")
                text, where = path.read_text(), str(path)
            self.prb = parse_prb(text, self.admin.directory, where)
            self.admin.prb = self.prb

        adv = spec.get("adversary")
        self.mallory: Mallory | None = None
        if adv is not None:
            config = AdversaryConfig(
                frozenset(adv.get("capabilities", [])), adv.get("steal_auth_sk"), int(adv.get("seed", 0))
            )
            self.mallory = Mallory(config, self.backend, self.params)
            self.mallory.steal(self.users)

    # -- helpers -----------------------------------------------------------

    def user(self, name, step: int) -> UserAgent:
        u = self.users.get(name)
        if u is None:
            raise ScenarioError(f"unknown principal {name!r}", step)
        return u

    def _handles(self, act: dict, user: UserAgent | None, step: int) -> tuple[list[int], list[int]]:
        handles, bits = [], []
        for name in act.get("data", []):
            owner, _ = self.data.get(name, (None, None))
            if owner is None:
                raise ScenarioError(f"unknown data item {name!r}", step)
            holder = self.users[owner]
            if name not in holder.handles:
                raise ScenarioError(f"data item {name!r} has not been uploaded", step)
            h = holder.handles[name]
            handles.append(h)
            bits.extend(self.plain[h])
        return handles, bits

    def _attrs(self, act: dict, step: int) -> list[AttributeValue]:
        if self.prb is None:
            return []
        out = []
        for name, value in sorted(act.get("attrs", {}).items()):
            try:
                e = self.prb.entry(name)
                out.append(AttributeValue.from_int(name, e.width, int(value), e.category))
            except OblivionError as exc:
                raise ScenarioError(str(exc), step) from None
        return out

    def _oracle(self, func_id: int, bits: list[int]) -> list[int] | None:
        circ = self.funcs.get(func_id)
        if circ is None or circ.num_inputs != len(bits):
            return None
        return eval_plain(circ, bits)

    def _granted(self, user: UserAgent, attrs: list[AttributeValue], func_id: int) -> bool:
        prb = self.admin.prb
        if prb is None:
            return False
        values = {a.name: a.bits for a in attrs}
        if prb.identity is not None:
            ident = self.server.cloud.principals.get(user.principal_id, user.auth.public)
            values[prb.identity] = fingerprint_subject(ident, prb.entry(prb.identity).width, prb.identity).bits
        return prb.decide(values, func_id)

    # -- actions -----------------------------------------------------------

    def do_upload(self, act, step):
        user = self.user(_need(act, "user", step), step)
        name = _need(act, "data", step)
        if name not in self.data:
            raise ScenarioError(f"unknown data item {name!r}", step)
        owner, bits = self.data[name]
        h = upload(self.bus, user, self.server, name, bits, self.signed)
        self.plain[h] = bits
        return OK, {"handle": h}

    def do_run(self, act, step):
        user = self.user(_need(act, "user", step), step)
        func_id = int(_need(act, "func", step))
        inputs = [int(b) for b in act.get("inputs", [])]
        handles, data_bits = self._handles(act, user, step)
        auth = user.previous_auth if act.get("use_old_auth") else None
        if act.get("use_old_auth") and auth is None:
            raise ScenarioError(f"{user.principal_id} has no previous auth key", step)
        expect = self._oracle(func_id, inputs + data_bits)
        if self.protocol == "basic":
            out = basic_run(self.bus, user, self.server, func_id, inputs, handles, self.signed)
        elif self.protocol == "mssp":
            out = mssp_run(self.bus, user, self.server, func_id, inputs, handles, auth)
        else:
            attrs = self._attrs(act, step)
            out = mcsp_run(self.bus, user, self.server, func_id, inputs, handles, attrs, auth)
            granted = self._granted(user, attrs, func_id)
            if isinstance(out, DeniedSentinel):
                sentinel_ok = not granted and not any(out.bits)
                return (DENIED if sentinel_ok else MISMATCH), {"output": list(out.bits), "oracle": expect}
            if not granted:
                return MISMATCH, {"output": out, "oracle": expect}
        return (OK if out == expect else MISMATCH), {"output": list(out), "oracle": expect}

    def do_prb_upload(self, act, step):
        user = self.user(_need(act, "user", step), step)
        if self.prb is None:
            raise ScenarioError("scenario has no prb section", step)
        if user is not self.admin:
            # a partner tries to install the same policy under its own signature
            user.prb = self.prb
        mcsp_prb_upload(self.bus, user, self.server, user.prb)
        return OK, {"rules": len(user.prb.rules)}

    def do_rotate_auth(self, act, step):
        user = self.user(_need(act, "user", step), step)
        admin = self.user(act.get("admin", self.admin.principal_id), step)
        rotate_auth_key(self.bus, user, admin, self.server, int(_need(act, "new_seed", step)))
        return OK, {"fingerprint": user.auth.public.fingerprint}

    def do_revoke(self, act, step):
        admin = self.user(act.get("admin", self.admin.principal_id), step)
        before = self.admin.prb
        revoke_user(self.bus, admin, self.server, _need(act, "principal", step))
        after = self.admin.prb
        removed = 0 if before is None else len(before.rules) - len(after.rules)
        return OK, {"removed": removed}

    def do_reencrypt(self, act, step):
        admin = self.user(act.get("admin", self.admin.principal_id), step)
        strategy = _need(act, "strategy", step)
        if strategy not in STRATEGIES:
            raise ScenarioError(f"unknown strategy {strategy!r}", step)
        old = admin.eval_keys
        new = self._keygen(int(_need(act, "new_eval_seed", step)))
        partners = [u for u in self.users.values() if u is not admin and u.eval_keys is not None]
        used = reencrypt_data(self.bus, admin, self.server, strategy, new, partners, bool(act.get("fallback")))
        # oracle check over the whole store: new key recovers it, old key does not
        store = self.server.cloud.resources
        truth = [b for h in store.handles() for b in self.plain[h]]
        cts = [ct for h in store.handles() for ct in store.fetch(h)]
        new_ok = decrypt_bits(new.secret, cts) == truth
        try:
            old_ok = decrypt_bits(old.secret, cts) == truth
        except KeyMismatch:
            old_ok = False
        if not old_ok and self.backend != "clear":
            old_ok = raw_decrypt_bits(old.secret, cts) == truth
        detail = {"strategy": used, "new_key_decrypts": new_ok, "old_key_decrypts": old_ok}
        return (OK if new_ok and not old_ok else MISMATCH), detail

    def _mallory(self, step) -> Mallory:
        if self.mallory is None:
            raise ScenarioError("scenario has no adversary section", step)
        return self.mallory

    def _attack_request(self, act, step, stolen: bool):
        m = self._mallory(step)
        victim = act.get("victim", "mallory")
        func_id = int(_need(act, "func", step))
        inputs = [int(b) for b in act.get("inputs", [])]
        handles, data_bits = self._handles(act, None, step)
        attrs = self._attrs(act, step)
        att = m.request(
            self.bus, self.server, self.server.cloud.eval_pk, victim, func_id, inputs, handles, attrs, stolen
        )
        detail = {"evaluated": att.evaluated}
        if att.status != "accepted":
            # a rejection only counts if nothing was evaluated for it
            return (att.status if not att.evaluated else "evaluated-after-rejection"), detail
        truth = self._oracle(func_id, inputs + data_bits)
        if self.protocol == "mcsp" and truth is not None:
            granted = self._granted(self.users[victim], attrs, func_id) if victim in self.users else False
            truth = [int(granted)] + [b & int(granted) for b in truth]
        detail["adversary_output"] = att.outputs
        detail["oracle"] = truth
        return ("decrypted" if att.outputs == truth else "undecryptable"), detail

    def do_mallory_inject(self, act, step):
        return self._attack_request(act, step, stolen=False)

    def do_mallory_stolen_auth(self, act, step):
        return self._attack_request(act, step, stolen=True)

    def do_mallory_replay(self, act, step):
        att = self._mallory(step).replay(self.bus, self.server)
        if att.status == "accepted":
            return "accepted", {"evaluated": att.evaluated}
        return att.status, {"evaluated": att.evaluated}

    def do_mallory_tamper(self, act, step):
        victim = self.user(_need(act, "victim", step), step).principal_id
        self._mallory(step).arm_tamper(self.bus, victim)
        return "armed", {}

    def do_mallory_read_server(self, act, step):
        report = self._mallory(step).read_server(self.server)
        return leakage_verdict(report), {
            "classes": report.counts,
            "violations": [list(v) for v in report.violations],
            "ciphertext_digest": report.ciphertext_digest,
        }

    ACTIONS = {
        "upload": do_upload,
        "run": do_run,
        "prb_upload": do_prb_upload,
        "rotate_auth": do_rotate_auth,
        "revoke": do_revoke,
        "reencrypt": do_reencrypt,
        "mallory_inject": do_mallory_inject,
        "mallory_stolen_auth": do_mallory_stolen_auth,
        "mallory_replay": do_mallory_replay,
        "mallory_tamper": do_mallory_tamper,
        "mallory_read_server": do_mallory_read_server,
    }

    def execute(self) -> ScenarioResult:
        results = []
        for i, act in enumerate(self.spec.get("script", [])):
            if not isinstance(act, dict):
                raise ScenarioError("script entries must be objects", i)
            kind = act.get("action")
            handler = self.ACTIONS.get(kind)
            if handler is None:
                raise ScenarioError(f"unknown action {kind!r}", i)
            expected = act.get("expect", OK)
            actor = act.get("user") or act.get("admin") or act.get("victim") or (
                "mallory" if kind.startswith("mallory") else self.admin.principal_id
            )
            self.bus.transcript.note(action=kind, index=i, phase="begin", actor=actor)
            try:
                outcome, detail = handler(self, act, i)
            except ScenarioError:
                raise
            except OblivionError as exc:
                outcome, detail = type(exc).__name__, {"message": str(exc)}
            res = StepResult(i, kind, actor, outcome, expected, _plain(detail))
            self.bus.transcript.note(
                action=kind, index=i, phase="end", outcome=outcome, expected=expected, passed=res.passed
            )
            results.append(res)
        return ScenarioResult(self.name, self.bus.transcript, results, self.server)


def _plain(x: Any):
    """JSON-safe copy of a detail mapping."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def run_scenario(
    spec: dict | str | os.PathLike,
    backend: str | None = None,
    params: SchemeParams | None = None,
) -> ScenarioResult:
    """Execute a scenario; ``backend``/``params`` override the file's own choice."""
    if not isinstance(spec, dict):
        spec = load_scenario(spec)
    try:
        return _Run(spec, backend, params).execute()
    except ScenarioError:
        raise
    except OblivionError as exc:
        raise ScenarioError(f"setup failed: {type(exc).__name__}: {exc}") from exc
