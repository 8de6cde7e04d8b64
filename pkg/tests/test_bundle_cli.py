"""Bundles and the command line: round trips, tampering, exit codes, determinism."""

import json

import pytest

from fakeideals import cli
from fakeideals.bundle import checksum, dumps, loads, make_bundle, verify

CASES = [
    ("eval-h", {"h": "exp 2", "lo": 0, "hi": 6}),
    ("check-h", {"h": "poly n^2", "range": 6}),
    ("transform", {"kind": "log-remark", "limit": 1000}),
    ("diagonal", {"action": "build", "s": "table 0 | const 2", "t": "const 1", "depth": 30}),
    ("witness", {"tag": "e-not-ideal", "h": "exp 2", "steps": 5}),
]


@pytest.mark.parametrize("command,params", CASES)
def test_round_trip_and_verify(command, params):
    b = make_bundle(command, dict(params))
    text = dumps(b)
    assert dumps(loads(text)) == text
    assert verify(loads(text)) == []
    assert json.dumps(b["body"]).count(".") == 0 or "." not in json.dumps(b["body"]["result"].get("ledger", {}))


def test_rationals_are_pairs():
    b = make_bundle("transform", {"kind": "cover-to-levels", "sigmas": [[0], [1, 1]], "h": "exp 2"})
    assert b["body"]["result"]["extra"]["ledger"]["partial_sum"] == [3, 4]


def test_tamper_detected():
    b = make_bundle("witness", {"tag": "e-not-ideal", "h": "exp 2", "steps": 4})
    bad = loads(dumps(b))
    bad["body"]["result"]["summary"]["a"][1] = 4
    assert "checksum mismatch" in verify(bad)
    bad["checksum"] = checksum(bad["header"], bad["body"])  # re-signed edit
    assert any("differs from rebuild" in p for p in verify(bad))
    bad = loads(dumps(b))
    bad["header"]["params"]["steps"] = 5
    assert verify(bad)


def run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_e_not_ideal(capsys):
    code, out, _ = run(["witness", "e-not-ideal", "--h", "exp 2", "--steps", "6", "--format", "structured"], capsys)
    assert code == 0
    summary = json.loads(out)["body"]["result"]["summary"]
    assert summary["a"][1] == 3 and summary["b"][2] == 7


def test_cli_verify(tmp_path, capsys):
    path = tmp_path / "b.json"
    code, _, _ = run(["witness", "e-not-ideal", "--h", "exp 2", "--steps", "4", "--out", str(path)], capsys)
    assert code == 0
    assert run(["verify", str(path)], capsys)[0] == 0
    path.write_text(path.read_text().replace('"steps": 4', '"steps": 3'))
    code, out, _ = run(["verify", str(path)], capsys)
    assert code == 4 and "checksum mismatch" in out
    (tmp_path / "junk.json").write_text("{not json")
    assert run(["verify", str(tmp_path / "junk.json")], capsys)[0] == 4


def test_cli_separate_ten_stages(capsys):
    # ten stages need far more than 500 levels (window ends grow tower-like)
    argv = ["diagonal", "separate", "--f", "poly n", "--g", "poly n^3", "--depth", "500", "--stages", "10"]
    code, _, err = run(argv, capsys)
    assert code == 2 and "DepthExhausted" in err
    assert run(argv + ["--allow-partial"], capsys)[0] == 4
    code, out, _ = run(argv[:-1] + ["2"], capsys)
    assert code == 0 and "hits: [1, 2, 3]" in out


def test_cli_exit_codes(capsys):
    assert run(["eval-h", "--h", "bogus 3"], capsys)[0] == 2
    assert run(["diagonal", "separate", "--f", "poly n", "--g", "poly n", "--depth", "10"], capsys)[0] == 2
    code, _, err = run(["diagonal", "build", "--s", "const 0", "--t", "const 1", "--depth", "5",
                        "--ceiling", "50"], capsys)
    assert code in (0, 3)
    code, _, err = run(["transform", "fin-to-param", "--system", "{\"kind\": \"prefix\", \"levels\": {}}",
                        "--nblocks", "3"], capsys)
    assert code in (0, 2)


def test_cli_ceiling_exit(capsys):
    code, _, err = run(["witness", "e-square", "--p", "poly n^6", "--depth-blocks", "3", "--ceiling", "3"], capsys)
    assert code == 3 and "SearchCeilingExceeded" in err


def test_cli_deterministic(capsys):
    argv = ["diagonal", "escape", "--s", "table 0 | const 2", "--t", "const 1", "--depth", "300",
            "--stages", "2", "--opponent", "random", "--seed", "5", "--format", "structured"]
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first == second and first[0] == 0


def test_cli_set_parameters(capsys):
    code, out, _ = run(["witness", "merge", "--set", "opponents=[]", "--depth", "4",
                        "--format", "structured"], capsys)
    assert code == 0 and json.loads(out)["body"]["result"]["summary"]["f"] == [1] * 5
