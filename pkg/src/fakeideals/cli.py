"""Command line front end.  Exit codes: 0 ok, 2 precondition, 3 search ceiling, 4 verification."""

from __future__ import annotations

import argparse
import json
import sys

from .builders import WITNESSES
from .bundle import dumps, failed_checks, loads, make_bundle, verify
from .errors import EXIT_PRECONDITION, EXIT_VERIFICATION, FakeIdealsError

SUPPRESS = argparse.SUPPRESS


def _json(text: str):
    """A JSON value, or ``@path`` to read one from a file."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"not valid JSON: {text!r}") from None


def _opponent(text: str):
    if text in ("empty", "random", "zeros"):
        return {"kind": text}
    return _json(text)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = p.add_argument_group("global")
    g.add_argument("--depth", type=int, default=SUPPRESS)
    g.add_argument("--stages", type=int, default=SUPPRESS)
    g.add_argument("--ceiling", type=int, default=SUPPRESS, help="search bound (default 1000000)")
    g.add_argument("--burn-in", dest="burn_in", type=int, default=SUPPRESS)
    g.add_argument("--out", default=SUPPRESS, help="write the bundle here")
    g.add_argument("--format", choices=("text", "structured"), default=SUPPRESS)
    g.add_argument("--seed", type=int, default=SUPPRESS, help="seed for random opponents")
    return p


def make_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fakeideals", parents=[common], allow_abbrev=False,
                                     description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-h", parents=[common], allow_abbrev=False, help="tabulate a rule")
    p.add_argument("--h", default=SUPPRESS)
    p.add_argument("--lo", type=int, default=SUPPRESS)
    p.add_argument("--hi", type=int, default=SUPPRESS)

    p = sub.add_parser("check-h", parents=[common], allow_abbrev=False, help="supermultiplicativity, limsup, monotonicity")
    p.add_argument("--h", default=SUPPRESS)
    p.add_argument("--range", type=int, default=SUPPRESS)

    p = sub.add_parser("membership", parents=[common], allow_abbrev=False, help="hit report of a point against a system")
    p.add_argument("--system", type=_json, default=SUPPRESS)
    p.add_argument("--point", type=_json, default=SUPPRESS)

    p = sub.add_parser("transform", parents=[common], allow_abbrev=False, help="system transform with coverage certificate")
    p.add_argument("kind", choices=("cover-to-levels", "levels-to-cover", "to-c", "to-summable", "e-to-n",
                                    "fin-e-to-fin-n", "fin-n-to-fin-s", "fin-to-param", "regroup",
                                    "refit", "ioe-to-minus", "log-remark"))
    p.add_argument("--system", type=_json, default=SUPPRESS)
    p.add_argument("--h", default=SUPPRESS)
    p.add_argument("--sigmas", type=_json, default=SUPPRESS)
    p.add_argument("--eps", default=SUPPRESS)
    p.add_argument("--c", default=SUPPRESS)
    p.add_argument("--nblocks", type=int, default=SUPPRESS)
    p.add_argument("--limit", type=int, default=SUPPRESS)
    p.add_argument("--point", type=_json, default=SUPPRESS)

    p = sub.add_parser("diagonal", parents=[common], allow_abbrev=False, help="diagonal lemma plans and escapes")
    p.add_argument("action", choices=("build", "escape", "separate", "strict", "antichain"))
    for name in ("s", "t", "f", "g", "A", "B"):
        p.add_argument(f"--{name}", default=SUPPRESS)
    p.add_argument("--opponent", type=_opponent, default=SUPPRESS)
    p.add_argument("--budget", type=int, default=SUPPRESS)
    p.add_argument("--check-upto", dest="check_upto", type=int, default=SUPPRESS)
    p.add_argument("--no-thin", dest="thin", action="store_false", default=SUPPRESS)
    p.add_argument("--allow-partial", dest="allow_partial", action="store_true", default=SUPPRESS)

    p = sub.add_parser("witness", parents=[common], allow_abbrev=False, help="theorem witnesses")
    p.add_argument("tag", choices=sorted(WITNESSES))
    for name in ("h", "p", "f", "budget"):
        p.add_argument(f"--{name}", default=SUPPRESS)
    for name in ("steps", "count", "depth-blocks", "max-len", "max-entry", "n"):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), type=int, default=SUPPRESS)
    for name in ("a", "parity", "point", "F", "C", "witnesses", "opponents"):
        p.add_argument(f"--{name}", type=_json, default=SUPPRESS)
    p.add_argument("--opponent", type=_opponent, default=SUPPRESS)
    p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                   help="any other parameter")

    p = sub.add_parser("verify", parents=[common], allow_abbrev=False, help="re-check a bundle file")
    p.add_argument("bundle")
    return parser


_NOT_PARAMS = {"command", "out", "format", "seed", "bundle", "set"}


def _params(ns: argparse.Namespace) -> dict:
    params = {k: v for k, v in vars(ns).items() if k not in _NOT_PARAMS}
    for item in getattr(ns, "set", []):
        key, _, value = item.partition("=")
        params[key] = _json(value)
    seed = getattr(ns, "seed", None)
    for key in ("opponent",):
        opp = params.get(key)
        if isinstance(opp, dict) and opp.get("kind") == "random" and seed is not None:
            opp.setdefault("seed", seed)
    if "opponents" in params and seed is not None:
        for opp in params["opponents"]:
            if opp.get("kind") == "random":
                opp.setdefault("seed", seed)
    return params


_WIDTH = 100


def _short(value) -> str:
    text = json.dumps(value, sort_keys=True)
    return text if len(text) <= _WIDTH else text[:_WIDTH - 3] + "..."


def _text(bundle: dict) -> str:
    """Terse listing; long values are cut, the structured form keeps them whole."""
    h, body = bundle["header"], bundle["body"]
    lines = [f"{h['command']}: {h['tag']}"]
    res = body["result"]
    for key in sorted(res):
        value = res[key]
        if key == "ledger" and isinstance(value, dict):
            p, q = value["partial_sum"]
            exact = f"{p}/{q}"
            if len(exact) > _WIDTH:
                try:
                    exact = f"~{p / q:.6g} (exact in structured output)"
                except OverflowError:
                    exact = _short(exact)
            lines.append(f"  ledger partial sum: {exact}")
        elif isinstance(value, dict) and "verdict" in value:
            lines.append(f"  {key}: {value['verdict']} {_short(value.get('hits', []))}")
        else:
            lines.append(f"  {key}: {_short(value)}")
    for name, c in sorted(body["checks"].items()):
        lines.append(f"  [{'pass' if c['passed'] else 'FAIL'}] {name}")
    lines += [f"  note: {n}" for n in body["notes"]]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: list[str] | None = None) -> int:
    parser = make_parser()
    ns = parser.parse_args(argv)
    fmt = getattr(ns, "format", "text")
    out = getattr(ns, "out", None)
    if ns.command == "verify":
        try:
            with open(ns.bundle) as fh:
                bundle = loads(fh.read())
        except (OSError, ValueError) as e:
            print(f"error: VerificationFailed: cannot read bundle: {e}", file=sys.stderr)
            return EXIT_VERIFICATION
        problems = verify(bundle)
        for pr in problems:
            print(f"FAIL {pr}")
        if not problems:
            print("ok")
        return EXIT_VERIFICATION if problems else 0
    try:
        bundle = make_bundle(ns.command, _params(ns))
    except FakeIdealsError as e:
        print(f"error: {e.name}: {e}", file=sys.stderr)
        return e.exit_code
    except argparse.ArgumentTypeError as e:
        print(f"error: PreconditionError: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    if out:
        _emit(dumps(bundle), out)
        if fmt == "text":
            sys.stdout.write(_text(bundle))
    else:
        _emit(dumps(bundle) if fmt == "structured" else _text(bundle), None)
    return EXIT_VERIFICATION if failed_checks(bundle) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
