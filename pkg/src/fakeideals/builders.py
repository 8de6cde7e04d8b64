"""Command -> bundle body.  Every builder is deterministic in its parameters.

A builder takes a parameter dict (JSON values only), fills in defaults and
returns ``(params, tag, body)``.  The body holds ``result``, ``checks``
(name -> ``{"passed", "detail"}``) and ``notes``.  ``verify`` reruns the
builder on the stored parameters and compares bodies.
"""

from __future__ import annotations

import dataclasses
import random
from fractions import Fraction
from typing import Callable

from . import diagonal as dg
from . import transforms as tf
from . import witnesses as wt
from .errors import PreconditionError
from .param import DEFAULT_CEILING, ParamFunction, check_supermultiplicative, frac_pair
from .rules import parse_rule, parse_set
from .systems import (
    BlockSystem,
    IntervalPartition,
    MinusWitness,
    Point,
    PrefixSystem,
    TreeMap,
    membership_report,
)

# ---------------------------------------------------------------------------
# encoding to JSON values


def encode(x):
    """JSON-compatible form; rationals become ``[numerator, denominator]``."""
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, Fraction):
        return frac_pair(x)
    if isinstance(x, ParamFunction):
        return {"rule": str(x), "spec": x.to_dict()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((encode(v) for v in x), key=repr)
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if hasattr(x, "to_dict"):
        return encode(x.to_dict())
    if dataclasses.is_dataclass(x):
        return {f.name: encode(getattr(x, f.name)) for f in dataclasses.fields(x)
                if not f.name.startswith("_") and not callable(getattr(x, f.name))}
    raise TypeError(f"cannot encode {type(x).__name__}")


def _check(passed, detail=None) -> dict:
    return {"passed": bool(passed), "detail": encode(detail)}


def _problems(lst) -> dict:
    return _check(not lst, list(lst))


def _body(result: dict, checks: dict | None = None, notes=()) -> dict:
    return {"result": encode(result), "checks": checks or {}, "notes": list(notes)}


def _defaults(params: dict, **defaults) -> dict:
    out = dict(defaults)
    out.update({k: v for k, v in params.items() if v is not None})
    unknown = set(out) - set(defaults)
    if unknown:
        raise PreconditionError(f"unknown parameters {sorted(unknown)}")
    return out


# ---------------------------------------------------------------------------
# specs for systems, points, opponents


def _words(ws) -> list[tuple]:
    return [tuple(w) for w in ws]


def point_from(spec) -> Point:
    if isinstance(spec, list):
        return Point.eventually_zero(spec)
    return Point.from_dict(spec)


def partition_from(spec) -> IntervalPartition:
    if spec in ("unit", "triangular"):
        return getattr(IntervalPartition, spec)()
    if isinstance(spec, int):
        return IntervalPartition.constant(spec)
    return IntervalPartition.from_dict(spec)


def rule_or_none(text):
    return None if text in (None, "", "fin") else parse_rule(text)


def system_from(spec):
    kind = spec.get("kind", "prefix")
    h = rule_or_none(spec.get("h"))
    if kind == "prefix":
        levels = {int(n): _words(ws) for n, ws in spec.get("levels", {}).items()}
        return PrefixSystem.explicit(levels, h, name=spec.get("name", "prefix"))
    if kind == "block":
        blocks = {int(n): _words(ws) for n, ws in spec.get("blocks", {}).items()}
        return BlockSystem.explicit(partition_from(spec.get("partition", "unit")), blocks,
                                    spec.get("quantifier", "exists"), h, spec.get("name", "block"))
    if kind == "minus":
        return MinusWitness(point_from(spec.get("pattern", [])),
                            partition_from(spec.get("partition", "unit")))
    raise PreconditionError(f"unknown system kind {kind!r}")


def opponent_levels(spec) -> dict[int, list[tuple]]:
    """Explicit levels of an opponent; random ones are drawn from their seed."""
    kind = spec.get("kind", "empty")
    if kind == "empty":
        return {}
    if kind == "explicit":
        return {int(n): sorted(_words(ws)) for n, ws in spec.get("levels", {}).items() if ws}
    if kind == "random":
        rng = random.Random(spec.get("seed", 0))
        top, entry = spec.get("max_level", 20), spec.get("max_entry", 9)
        per = spec.get("per_level", 1)
        out = {}
        for n in range(1, top + 1):
            k = rng.randint(0, per)
            ws = {tuple(rng.randint(0, entry) for _ in range(n)) for _ in range(k)}
            if ws:
                out[n] = sorted(ws)
        return out
    if kind == "zeros":
        return {n: [(0,) * n] for n in range(1, spec.get("max_level", 20) + 1)}
    raise PreconditionError(f"unknown opponent kind {kind!r}")


def opponent_from(spec) -> PrefixSystem:
    return PrefixSystem.explicit(opponent_levels(spec), None, name="opponent")


def tree_map_from(spec) -> TreeMap:
    """``[w...]`` constant word, ``{"const": c}``, ``"length"`` or ``{"sum_mod": m}``."""
    if isinstance(spec, list):
        return TreeMap.const_word(spec)
    if spec == "length":
        return TreeMap.length()
    if isinstance(spec, dict) and "const" in spec:
        return TreeMap.const_value(spec["const"])
    if isinstance(spec, dict) and "sum_mod" in spec:
        m = spec["sum_mod"]
        return TreeMap(f"sum mod {m}", lambda s: sum(s) % m)
    raise PreconditionError(f"unknown tree map {spec!r}")


def _materialize(system, depth: int):
    if isinstance(system, PrefixSystem):
        return {n: sorted(system.level(n)) for n in range(depth + 1) if system.size(n)}
    return system.materialize(depth)


# ---------------------------------------------------------------------------
# param commands


def build_eval_h(p):
    p = _defaults(p, h="exp 2", lo=0, hi=10)
    h = parse_rule(p["h"])
    vals = {n: h(n) for n in range(p["lo"], p["hi"] + 1)}
    return p, "eval-h", _body({"rule": h, "values": vals})


def build_check_h(p):
    p = _defaults(p, h="exp 2", range=64)
    h = parse_rule(p["h"])
    sm = check_supermultiplicative(h, p["range"])
    res = {"rule": h, "supermultiplicative": sm, "certified": sm.certified,
           "limsup_certificate": h.has_limsup, "monotone": h.is_monotone}
    return p, "check-h", _body(res)


def build_membership(p):
    p = _defaults(p, system={"kind": "prefix"}, point=[], depth=20, burn_in=0)
    rep = membership_report(system_from(p["system"]), point_from(p["point"]), p["depth"], p["burn_in"])
    return p, "membership", _body({"report": rep})


# ---------------------------------------------------------------------------
# transforms


def _cert(c: tf.CoverageCertificate, domain: int) -> dict:
    return {"kind": c.kind, "stage_map_doc": c.stage_map_doc,
            "stage_map": {n: c.stage_map(n) for n in range(domain)},
            "inequalities": [[lbl, lhs, rhs] for lbl, lhs, rhs in c.inequalities],
            "notes": list(c.notes)}


def build_transform(p):
    p = _defaults(p, kind="e-to-n", system=None, h=None, sigmas=None, eps="1/2", c="1/2",
                  nblocks=4, depth=10, limit=1000, point=None)
    kind = p["kind"]
    notes = []
    if kind == "log-remark":
        r = tf.log_remark_check(p["limit"])
        ok = r.bound_failures == (2, 3) and r.holds_from == 4
        return p, "transform", _body({"check": r}, {"bound holds from 4": _check(ok, r.bound_failures)},
                                     r.notes)
    if kind == "ioe-to-minus":
        w = tf.ioe_to_minus(point_from(p["point"] or []))
        return p, "transform", _body({"witness": {"pattern": w.pattern, "partition": w.partition}})
    if kind == "levels-to-cover":
        cr = tf.levels_to_cover(system_from(p["system"]), Fraction(p["eps"]), p["depth"])
        return p, "transform", _body({"cover": cr}, {"tail < eps": _check(cr.tail_bound < Fraction(p["eps"]),
                                                                            cr.tail_bound)})
    if kind == "cover-to-levels":
        r = tf.cover_to_levels(_words(p["sigmas"] or []), parse_rule(p["h"] or "exp 2"))
        domain = len(p["sigmas"] or [])
    elif kind in ("to-c", "to-summable"):
        r = tf.normalize_c(system_from(p["system"]), kind, Fraction(p["c"]), p["nblocks"])
        domain = p["nblocks"]
    elif kind == "e-to-n":
        r = tf.e_to_n(system_from(p["system"]), p["nblocks"])
        domain = p["nblocks"]
    elif kind == "fin-e-to-fin-n":
        r = tf.fin_e_to_fin_n(system_from(p["system"]), p["nblocks"])
        domain = p["nblocks"]
    elif kind == "fin-n-to-fin-s":
        r = tf.fin_n_to_fin_s(system_from(p["system"]))
        domain = p["depth"]
    elif kind == "fin-to-param":
        r = tf.fin_to_param(system_from(p["system"]), p["depth"])
        domain = p["depth"] + 1
    elif kind == "regroup":
        r = tf.regroup_n_to_s(system_from(p["system"]), parse_rule(p["h"] or "exp 2"), p["nblocks"])
        domain = p["depth"]
    elif kind == "refit":
        r = tf.refit_param(parse_rule(p["h"] or "log 2"), None, p["nblocks"])
        domain = p["depth"]
        notes.append(f"h' = {r.extra['h_prime']}")
    else:
        raise PreconditionError(f"unknown transform {kind!r}")
    depth = p["nblocks"] if isinstance(r.target, BlockSystem) else p["depth"]
    if kind in ("e-to-n", "fin-e-to-fin-n", "cover-to-levels"):
        depth = max(r.target.support(10 ** 9), default=0)
    res = {"target": _materialize(r.target, depth), "certificate": _cert(r.certificate, domain),
           "extra": r.extra}
    checks = {"certificate inequalities": _check(r.certificate.holds, r.certificate.failures())}
    return p, "transform", _body(res, checks, notes)


# ---------------------------------------------------------------------------
# diagonal lemma


def _plan_checks(plan: dg.DiagonalPlan) -> dict:
    return {"sizes": _problems(plan.check_sizes()), "extension": _problems(plan.check_extension()),
            "breakpoints": _problems(plan.check_breakpoints())}


def _escape_part(plan, opponent, p, h=None) -> tuple[dict, dict]:
    x, cert = dg.escape(plan, opponent, p["stages"], p["burn_in"], p["allow_partial"])
    rep = membership_report(plan.system(h), x, cert.checked_depth)
    opp = membership_report(opponent, x, cert.checked_depth, cert.n0 + 1)
    checks = {
        "escape certificate": _problems(dg.verify_escape(plan, opponent, cert)),
        "hit levels reproduced": _check(set(cert.hit_levels) <= set(rep.hits), rep.hits),
        "no opponent hit past n0": _check(not opp.hits, opp.hits),
        "requested stages reached": _check(len(cert.stages) >= p["stages"],
                                           {"requested": p["stages"], "reached": len(cert.stages)}),
    }
    return {"certificate": cert, "hits": cert.hit_levels}, checks


def build_diagonal(p):
    p = _defaults(p, action="build", s="const 2", t="const 1", f=None, g=None, A="evens", B="odds",
                  depth=100, stages=3, burn_in=0, allow_partial=False, thin=True, budget=1,
                  check_upto=8, opponent={"kind": "empty"}, ceiling=1_000_000)
    action = p["action"]
    res: dict = {}
    checks: dict = {}
    notes: list = []
    h = None
    if action in ("build", "escape"):
        plan = dg.build_diagonal(parse_rule(p["s"]), parse_rule(p["t"]), p["depth"], p["ceiling"])
    elif action == "separate":
        sep = dg.separate_summable(parse_rule(p["f"] or "poly n"), parse_rule(p["g"] or "poly n^3"),
                                   p["depth"], p["ceiling"])
    elif action == "strict":
        sep = dg.strict_inclusion(parse_rule(p["f"] or "pow 3/2"), parse_rule(p["g"] or "pow 2"),
                                  p["depth"], p["thin"], p["budget"], p["ceiling"])
        res["chosen"] = sep.extra["chosen"]
        res["h_values"] = sep.extra["h_values"]
        ineqs = sep.extra["inequalities"]
        checks["step inequalities"] = _check(all(a <= b for _, a, b in ineqs),
                                             [[lbl, a, b] for lbl, a, b in ineqs])
    elif action == "antichain":
        sep = dg.antichain_pair(parse_set(p["A"]), parse_set(p["B"]), p["depth"], p["check_upto"],
                                p["ceiling"])
        fc = sep.extra["checks"]
        res["factorial_checks"] = [{"n": c.n, "links": c.links} for c in fc]
        checks["factorial chain"] = _check(all(c.holds for c in fc), [c.n for c in fc if not c.holds])
        ineqs = sep.extra["inequalities"]
        checks["ledger terms"] = _check(all(a <= b for _, a, b in ineqs), len(ineqs))
        notes.append("the strict middle link is an equality at n = 2; the non-strict chain and "
                     "sum t < s(n) hold")
    else:
        raise PreconditionError(f"unknown diagonal action {action!r}")
    if action in ("separate", "strict", "antichain"):
        plan, h = sep.plan, sep.g
        res["ledger"] = sep.ledger
        res["reason"] = sep.reason
    res["plan"] = plan.summary()
    checks.update(_plan_checks(plan))
    if action != "build":
        part, more = _escape_part(plan, opponent_from(p["opponent"]), p, h)
        res.update(part)
        checks.update(more)
    return p, f"diagonal {action}", _body(res, checks, notes)


# ---------------------------------------------------------------------------
# witnesses


def _bundle_checks(b: wt.WitnessBundle) -> dict:
    return {name: _check(ok, detail) for name, (ok, detail) in b.run_checks().items()}


def _report_checks(report: dict) -> dict:
    return {k: _check(v[0], v[1]) for k, v in report.items()
            if isinstance(v, tuple) and len(v) == 2 and isinstance(v[0], bool)}


def _w_comeager(p):
    p = _defaults(p, h="exp 2", budget="1", count=8, max_len=6, max_entry=6, ceiling=DEFAULT_CEILING)
    b = wt.comeager_fakenull(parse_rule(p["h"]), Fraction(p["budget"]), p["count"], p["ceiling"])
    b.checks["density"] = lambda: wt.density_check(b.objects["sparse"].values, p["max_len"],
                                                   p["max_entry"])
    return p, b, {}


def _w_minus_nwd(p):
    p = _defaults(p, a=[0], stages=5, witnesses=[{"pattern": [], "partition": "unit"}],
                  ceiling=DEFAULT_CEILING)
    F = [MinusWitness(point_from(w["pattern"]), partition_from(w["partition"])) for w in p["witnesses"]]
    b = wt.minus_positive_nwd(tree_map_from(p["a"]), F, p["stages"], p["ceiling"])
    pts = {i: b.objects["traces"][i].xis[-1] for i in b.objects["traces"]}
    return p, b, {"points": pts}


def _w_family(p):
    p = _defaults(p, a=[0], count=3, stages=3, ceiling=DEFAULT_CEILING)
    b = wt.disjoint_positive_family(p["count"], tree_map_from(p["a"]), (), p["stages"], p["ceiling"])
    pts = [m.objects["traces"][0].xis[-1] for m in b.objects["members"]]
    return p, b, {"points": pts}


def _w_parity(p):
    p = _defaults(p, parity={"kind": "periodic", "head": [], "period": [0, 1]},
                  opponent={"kind": "empty"}, depth=30)
    b = wt.parity_escape(point_from(p["parity"]), opponent_from(p["opponent"]), p["depth"])
    return p, b, {"y": b.objects["prefix"]}


def _w_minus_domega(p):
    p = _defaults(p, f={"const": 5}, depth=20)
    b = wt.minus_not_domega(tree_map_from(p["f"]), p["depth"])
    return p, b, {"x": b.objects["prefix"]}


def _w_e_not_ideal(p):
    p = _defaults(p, h="exp 2", steps=6, C=None, depth=60, ceiling=DEFAULT_CEILING)
    b = wt.e_not_ideal(parse_rule(p["h"]), p["steps"], p["ceiling"])
    extra = {"state": b.objects["state"]}
    if p["C"] is not None:
        x, rep = wt.e_not_ideal_escape(b, system_from(p["C"]), p["depth"])
        b.checks["escape"] = lambda: (rep["ok"], rep)
        extra["escape"] = {"point": x, "report": rep}
    return p, b, extra


def _w_e_square(p):
    p = _defaults(p, p="poly 0", depth_blocks=3, opponent={"kind": "empty"}, ceiling=400)
    b = wt.e_square_vs_poly(parse_rule(p["p"]), p["depth_blocks"], p["ceiling"])
    x, rep = wt.e_square_escape(b, opponent_from(p["opponent"]), p["depth_blocks"])
    return p, b, {"sigmas": rep["sigmas"], "report": rep}


def _w_s_not_in_fin(p):
    p = _defaults(p, h="exp 2", depth=40, opponent={"kind": "empty"}, ceiling=DEFAULT_CEILING)
    b = wt.s_not_in_fin(parse_rule(p["h"]), p["depth"], 1, p["ceiling"])
    x, rep = wt.s_not_in_fin_escape(b, opponent_from(p["opponent"]), p["depth"])
    return p, b, {"point": x, "report": rep}


def _w_s_fin_strict(p):
    p = _defaults(p, opponent={"kind": "block", "partition": 2, "blocks": {}}, depth=20)
    x, rep = wt.s_fin_strict_escape(system_from(p["opponent"]), p["depth"])
    b = wt.WitnessBundle("union fS(h) strictly inside fS(Fin)", {})
    b.checks["escape"] = lambda: (rep["ok"], rep)
    return p, b, {"point": x}


def _w_s_orth(p):
    p = _defaults(p, h="exp 2", count=12, point=[], depth=100, ceiling=DEFAULT_CEILING)
    b = wt.s_orth_minus(parse_rule(p["h"]), 1, p["count"], p["ceiling"])
    ok, detail = wt.split_check(b, point_from(p["point"]), p["depth"])
    b.checks["hit/avoid split"] = lambda: (ok, detail)
    return p, b, {}


def _w_n_fin_not_orth(p):
    p = _defaults(p, F={"kind": "minus", "pattern": [], "partition": "unit"},
                  opponent={"kind": "empty"}, depth=30)
    x, rep = wt.n_fin_not_orth_escape(system_from(p["F"]), opponent_from(p["opponent"]), p["depth"])
    b = wt.WitnessBundle("fN(Fin) not orthogonal to M_-", {})
    return p, b, {"point": x, "report": rep}


def _w_envelope(p):
    p = _defaults(p, f="poly n", opponent={"kind": "empty"}, depth=10, n=3)
    f = parse_rule(p["f"])
    env = wt.dominating_envelope(f)
    r = wt.envelope_contains(opponent_from(p["opponent"]), f, p["depth"])
    b = wt.WitnessBundle("cof(fN(Fin)) <= d", {})
    b.checks["contained"] = lambda: (r.ok, r)
    return p, b, {"size": env.size(p["n"]), "threshold": r.threshold, "violations": r.violations}


def _w_merge(p):
    p = _defaults(p, opponents=[], depth=8)
    b = wt.bounding_merge([opponent_from(o) for o in p["opponents"]], p["depth"])
    return p, b, {}


WITNESSES: dict[str, Callable] = {
    "comeager": _w_comeager,
    "minus-nwd": _w_minus_nwd,
    "disjoint-family": _w_family,
    "parity": _w_parity,
    "minus-domega": _w_minus_domega,
    "e-not-ideal": _w_e_not_ideal,
    "e-square": _w_e_square,
    "s-not-in-fin": _w_s_not_in_fin,
    "s-fin-strict": _w_s_fin_strict,
    "s-orth": _w_s_orth,
    "n-fin-not-orth": _w_n_fin_not_orth,
    "envelope": _w_envelope,
    "merge": _w_merge,
}


def build_witness(p):
    p = dict(p)
    tag = p.pop("tag", None)
    if tag not in WITNESSES:
        raise PreconditionError(f"unknown witness {tag!r}; known: {sorted(WITNESSES)}")
    params, b, extra = WITNESSES[tag](p)
    checks = _bundle_checks(b)
    for key in ("report",):
        if key in extra:
            checks.update(_report_checks(extra[key]))
    res = {"summary": b.summary, **extra}
    return {"tag": tag, **params}, b.tag, _body(res, checks, b.notes)


BUILDERS: dict[str, Callable] = {
    "eval-h": build_eval_h,
    "check-h": build_check_h,
    "membership": build_membership,
    "transform": build_transform,
    "diagonal": build_diagonal,
    "witness": build_witness,
}


def build(command: str, params: dict):
    if command not in BUILDERS:
        raise PreconditionError(f"unknown command {command!r}")
    return BUILDERS[command](params)
