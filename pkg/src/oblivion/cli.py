"""Command-line entry point: ``oblivion <command> [options]``.

Exit codes: 0 success or expected outcome, 2 usage or input-format error,
3 crypto error, 4 unexpected protocol rejection, 5 scenario error.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from oblivion import __version__
from oblivion.abac import compile_for, dump_encrypted_prb, encrypt_prb, parse_prb
from oblivion.authsig import AuthPublicKey, auth_keygen, dump_auth_key, load_auth_key
from oblivion.circuit import build_named, mult_depth, parse, serialize
from oblivion.errors import (
    CryptoError,
    FormatError,
    OblivionError,
    ProtocolRejection,
    ScenarioError,
    ShapeError,
)
from oblivion.fhe import (
    BACKENDS,
    EvalPublicKey,
    EvalSecretKey,
    SchemeParams,
    decrypt_bits,
    encrypt_bits,
    keygen,
)
from oblivion.fhe.io import dump_ciphertexts, dump_public_key, dump_secret_key, load_ciphertexts, load_key
from oblivion.protocol import error_class
from oblivion.simnet.scenario import run_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CRYPTO = 3
EXIT_REJECTED = 4
EXIT_SCENARIO = 5


def exit_code_for(exc: BaseException | type) -> int:
    cls = exc if isinstance(exc, type) else type(exc)
    if issubclass(cls, CryptoError):
        return EXIT_CRYPTO
    if issubclass(cls, ProtocolRejection):
        return EXIT_REJECTED
    if issubclass(cls, ScenarioError):
        return EXIT_SCENARIO
    if issubclass(cls, (FormatError, ShapeError, OSError, ValueError)):
        return EXIT_USAGE
    return EXIT_SCENARIO


class _Out:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *parts):
        if not self.quiet:
            print(*parts)


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _opt(args, name, default=None):
    return getattr(args, name, default)


def _params(args) -> SchemeParams | None:
    text = _opt(args, "params")
    return SchemeParams.parse(text) if text else None


def _backend(args) -> str:
    return _opt(args, "backend", "toy")


def _bits(text: str) -> list[int]:
    text = text.replace(",", "").replace(" ", "")
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"expected a bit string like 1011, got {text!r}")
    return [int(c) for c in text]


# --- commands -----------------------------------------------------------------

def cmd_keygen(args, out: _Out) -> int:
    seed = _opt(args, "seed", 0)
    target = _opt(args, "out")
    if not target:
        raise ValueError("keygen needs --out <prefix>")
    if args.kind == "auth":
        kp = auth_keygen(seed, args.principal)
        _write(target + ".pub", dump_auth_key(kp, "public"))
        _write(target + ".sec", dump_auth_key(kp, "secret"))
        out(f"auth key for {args.principal!r}: fingerprint {kp.public.fingerprint}")
    else:
        kp = keygen(_params(args), seed, _backend(args))
        _write(target + ".pub", dump_public_key(kp.public))
        _write(target + ".sec", dump_secret_key(kp.secret))
        out(f"eval key ({kp.public.backend}): fingerprint {kp.fingerprint}, depth {kp.public.max_mult_depth}")
    return EXIT_OK


def _load_eval(path: str, want) -> EvalPublicKey | EvalSecretKey:
    key = load_key(Path(path).read_text(), path)
    if not isinstance(key, want):
        raise FormatError(f"{path}: expected a {want.__name__} file")
    return key


def cmd_encrypt(args, out: _Out) -> int:
    pk = _load_eval(args.key, EvalPublicKey)
    cts = encrypt_bits(pk, _bits(args.bits), _opt(args, "seed", 0))
    _write(_opt(args, "out"), dump_ciphertexts(cts))
    return EXIT_OK


def cmd_decrypt(args, out: _Out) -> int:
    sk = _load_eval(args.key, EvalSecretKey)
    cts = load_ciphertexts(Path(args.input).read_text(), None, args.input)
    bits = "".join(str(b) for b in decrypt_bits(sk, cts))
    _write(_opt(args, "out"), bits + "\n")
    return EXIT_OK


def cmd_circuit(args, out: _Out) -> int:
    if args.circuit_cmd == "build":
        c = build_named(args.name, args.width)
        _write(_opt(args, "out"), serialize(c))
        return EXIT_OK
    c = parse(Path(args.path).read_text(), args.path)
    out(f"{args.path}: inputs={c.num_inputs} gates={len(c.gates)} outputs={c.num_outputs} mult_depth={mult_depth(c)}")
    return EXIT_OK


def _principals(specs: list[str] | None) -> dict[str, AuthPublicKey]:
    found = {}
    for spec in specs or []:
        name, sep, path = spec.partition("=")
        if not sep:
            raise ValueError(f"--principal expects name=path, got {spec!r}")
        key = load_auth_key(Path(path).read_text())
        found[name] = key if isinstance(key, AuthPublicKey) else key.public
    return found


def cmd_policy(args, out: _Out) -> int:
    prb = parse_prb(Path(args.path).read_text(), _principals(args.principal), args.path)
    if args.policy_cmd == "compile":
        c = compile_for(prb)
        target = _opt(args, "out")
        _write(target, serialize(c))
        if target not in (None, "-"):
            out(f"canAccess: inputs={c.num_inputs} gates={len(c.gates)} mult_depth={mult_depth(c)}")
        return EXIT_OK
    pk = _load_eval(args.key, EvalPublicKey)
    eprb = encrypt_prb(pk, prb, _opt(args, "seed", 0), pad_to=args.pad_to)
    _write(_opt(args, "out"), dump_encrypted_prb(eprb))
    return EXIT_OK


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("oblivion") / "scenarios"
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def cmd_run(args, out: _Out) -> int:
    bundled = bundled_scenarios()
    if args.list:
        for name in sorted(bundled):
            print(name)
        return EXIT_OK
    if not args.scenario:
        raise ValueError("run needs a scenario path or bundled name (see --list)")
    path = Path(args.scenario)
    if not path.exists():
        if args.scenario not in bundled:
            raise ScenarioError(f"no scenario file or bundled scenario named {args.scenario!r}")
        path = bundled[args.scenario]
    params = _params(args)
    backend = _opt(args, "backend")
    result = run_scenario(path, backend=backend, params=params)
    for s in result.steps:
        out(s.line())
    target = _opt(args, "out")
    if target:
        for p in result.write(target):
            out(f"wrote {p}")
    failed = [s for s in result.steps if not s.passed]
    out(f"{result.name}: {len(result.steps) - len(failed)}/{len(result.steps)} steps as expected")
    if not failed:
        return EXIT_OK
    return exit_code_for(error_class(failed[0].outcome))


# --- argument parsing -----------------------------------------------------------

def _globals(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS defaults let the flags appear before or after the subcommand
    s = argparse.SUPPRESS
    parser.add_argument("--backend", choices=BACKENDS, default=s, help="homomorphic backend (default toy)")
    parser.add_argument("--seed", type=int, default=s, help="deterministic seed (u64)")
    parser.add_argument("--params", default=s, metavar="SECRET,NOISE,PK", help="toy scheme parameters")
    parser.add_argument("--out", default=s, help="output path")
    parser.add_argument("--quiet", action="store_true", default=s, help="suppress the summary")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _globals(common)
    p = argparse.ArgumentParser(prog="oblivion", parents=[common], description="Oblivious cloud computation toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("keygen", parents=[common], help="generate auth or eval key files")
    k.add_argument("kind", choices=["auth", "eval"])
    k.add_argument("--principal", default="", help="principal id for auth keys")

    e = sub.add_parser("encrypt", parents=[common], help="encrypt a bit string")
    e.add_argument("--key", required=True, help="eval public key file")
    e.add_argument("bits")

    d = sub.add_parser("decrypt", parents=[common], help="decrypt a ciphertext file")
    d.add_argument("--key", required=True, help="eval secret key file")
    d.add_argument("input")

    c = sub.add_parser("circuit", parents=[common], help="inspect or build circuits")
    csub = c.add_subparsers(dest="circuit_cmd", required=True)
    cc = csub.add_parser("check", parents=[common], help="validate a netlist and print its stats")
    cc.add_argument("path")
    cb = csub.add_parser("build", parents=[common], help="emit a builder circuit as a netlist")
    cb.add_argument("name")
    cb.add_argument("--width", type=int, default=1)

    po = sub.add_parser("policy", parents=[common], help="compile or encrypt a policy rule base")
    psub = po.add_subparsers(dest="policy_cmd", required=True)
    for name, helptext in (("compile", "emit the canAccess circuit"), ("encrypt", "encrypt rule values")):
        q = psub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("path")
        q.add_argument("--principal", action="append", metavar="NAME=AUTHKEY", help="resolve @NAME references")
        if name == "encrypt":
            q.add_argument("--key", required=True, help="eval public key file")
            q.add_argument("--pad-to", type=int, default=None, help="pad with disabled rules")

    r = sub.add_parser("run", parents=[common], help="run a scenario file or a bundled scenario")
    r.add_argument("scenario", nargs="?")
    r.add_argument("--list", action="store_true", help="list bundled scenarios")
    return p


COMMANDS = {
    "keygen": cmd_keygen,
    "encrypt": cmd_encrypt,
    "decrypt": cmd_decrypt,
    "circuit": cmd_circuit,
    "policy": cmd_policy,
    "run": cmd_run,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    out = _Out(bool(_opt(args, "quiet", False)))
    try:
        return COMMANDS[args.command](args, out)
    except (OblivionError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
