"""Bundle files: canonical JSON with a sha256 checksum.

Layout::

    {"header":   {"version", "command", "tag", "params"},
     "body":     {"result", "checks", "notes"},
     "checksum": "sha256:<hex of canonical header+body>"}

Rationals are ``[numerator, denominator]`` pairs.  Canonical form is
``json.dumps(sort_keys=True, indent=1)`` plus a trailing newline, so
``dumps(loads(dumps(b))) == dumps(b)`` byte for byte.
"""

from __future__ import annotations

import hashlib
import json

from . import __version__
from .builders import build
from .errors import VerificationFailed

SCHEMA = "fakeideals-bundle/1"


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True)


def checksum(header: dict, body: dict) -> str:
    digest = hashlib.sha256(_canonical({"header": header, "body": body}).encode()).hexdigest()
    return f"sha256:{digest}"


def make_bundle(command: str, params: dict) -> dict:
    params, tag, body = build(command, params)
    header = {"schema": SCHEMA, "version": __version__, "command": command, "tag": tag,
              "params": json.loads(json.dumps(params))}
    body = json.loads(json.dumps(body))
    return {"header": header, "body": body, "checksum": checksum(header, body)}


def dumps(bundle: dict) -> str:
    return _canonical(bundle) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


def failed_checks(bundle: dict) -> list[str]:
    return sorted(name for name, c in bundle["body"]["checks"].items() if not c["passed"])


def verify(bundle: dict) -> list[str]:
    """Problems found; empty means the bundle is intact and every check passes.

    The checksum catches edits; rebuilding from the stored parameters and
    comparing bodies catches a re-signed edit; failed checks are reported.
    """
    try:
        header, body, stored = bundle["header"], bundle["body"], bundle["checksum"]
    except (KeyError, TypeError):
        return ["malformed bundle"]
    problems = []
    if stored != checksum(header, body):
        problems.append("checksum mismatch")
    if header.get("schema") != SCHEMA:
        problems.append(f"unknown schema {header.get('schema')!r}")
        return problems
    try:
        params, tag, fresh = build(header["command"], header["params"])
    except Exception as e:  # a tampered parameter may fail the builder in any way
        return problems + [f"rebuild failed: {type(e).__name__}: {e}"]
    fresh = json.loads(json.dumps(fresh))
    if tag != header.get("tag"):
        problems.append("tag differs from rebuild")
    if json.loads(json.dumps(params)) != header["params"]:
        problems.append("parameters differ from rebuild")
    for key in ("result", "checks", "notes"):
        if fresh.get(key) != body.get(key):
            problems.append(f"body {key} differs from rebuild")
    problems += [f"check failed: {name}" for name in failed_checks({"body": fresh})]
    return problems


def require_valid(bundle: dict) -> None:
    problems = verify(bundle)
    if problems:
        raise VerificationFailed("; ".join(problems))
