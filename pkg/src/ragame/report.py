"""JSON reports and plain-text tables.

Exact values are written as ``"p/q"`` strings (``"inf"`` for an infinite
ratio) so that consumers never see a rounded rational.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

from .cr_models import Bracket, CrResult, Exact, Infinite, LatticeReport, MinimaxReport, RelationVerdict
from .distributions import Delta, Iid, Mixture, Product, RandomOrderDet, RandomOrderInd
from .game import Game
from .strategies import RealizationPlan

SCHEMA = "ragame-report"
SCHEMA_VERSION = 1


def q(x) -> str | None:
    """``"p/q"`` (or ``"p"``) for a rational, ``"inf"`` for infinity."""
    if x is None:
        return None
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        raise TypeError("floating-point values are not exact")
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def value_json(value) -> dict:
    if isinstance(value, Exact):
        return {"kind": "exact", "value": q(value.value)}
    if isinstance(value, Infinite):
        return {"kind": "infinite", "value": "inf"}
    if isinstance(value, Bracket):
        return {"kind": "bracket", "lo": q(value.lo), "hi": q(value.hi)}
    raise TypeError(f"unknown value {value!r}")


def value_text(value) -> str:
    if isinstance(value, Exact):
        return q(value.value)
    if isinstance(value, Infinite):
        return "inf"
    return f"[{q(value.lo)}, {q(value.hi)}]"


def generator_json(g) -> dict | None:
    if g is None:
        return None
    if isinstance(g, Delta):
        return {"type": "delta", "r": list(g.r)}
    if isinstance(g, Iid):
        return {"type": "iid", "marginal": [q(p) for p in g.marginal]}
    if isinstance(g, Product):
        return {"type": "product", "marginals": [[q(p) for p in m] for m in g.marginals]}
    if isinstance(g, RandomOrderDet):
        return {"type": "random-order", "multiset": list(g.multiset.counts)}
    if isinstance(g, RandomOrderInd):
        return {"type": "random-order-ind", "marginals": [[q(p) for p in m] for m in g.marginals]}
    if isinstance(g, Mixture):
        return {
            "type": "mixture",
            "weights": [q(w) for w in g.weights],
            "components": [generator_json(c) for c in g.components],
        }
    raise TypeError(f"unknown generator {g!r}")


def plan_json(plan: RealizationPlan | None) -> list | None:
    """Complete-sequence entries ``x[(r, a)] > 0``; prefixes follow by summation."""
    if plan is None:
        return None
    rows = sorted(plan.full())
    return [{"r": list(r), "a": list(a), "p": q(v)} for r, a, v in rows]


def _detail(v):
    if isinstance(v, (Fraction, int)) and not isinstance(v, bool):
        return q(v)
    if isinstance(v, float):
        return q(v) if math.isinf(v) else v
    return v


def result_json(res: CrResult, witnesses: bool = True) -> dict:
    out = {
        "model": res.model.label,
        "class": res.model.cls.value,
        "knowledge": res.model.knowledge.value,
        "value": value_json(res.value),
        "method": res.method,
        "status": res.status,
        "details": {k: _detail(v) for k, v in sorted(res.details.items())},
    }
    if witnesses:
        out["witness_distribution"] = generator_json(res.witness_distribution)
        out["witness_plan"] = plan_json(res.witness_plan)
    return out


def game_json(game: Game, source: dict | None = None) -> dict:
    out = {"name": game.name, "n": game.n, "requests": game.request_count, "answers": game.answer_count}
    if source:
        out["source"] = source
    return out


def verdict_json(v: RelationVerdict) -> dict:
    return {"lhs": v.lhs, "relation": v.relation, "rhs": v.rhs, "verdict": v.verdict, "exact": v.exact}


def lattice_json(rep: LatticeReport) -> dict:
    return {
        "passed": rep.passed,
        "relations": [verdict_json(v) for v in rep.relations],
        "known_vs_unknown": [verdict_json(v) for v in rep.lemma2],
        "unordered": [{"lhs": a, "rhs": b, "observed": o} for a, b, o in rep.unordered],
    }


def minimax_json(rep: MinimaxReport) -> dict:
    return {
        "inf_sup": value_json(rep.inf_sup),
        "sup_inf": None if rep.sup_inf is None else value_json(rep.sup_inf),
        "equal": rep.equal,
        "rounds": rep.rounds,
        "converged": rep.converged,
    }


def envelope(command: str, version: str, seed: int | None, body: dict, timing: dict | None = None) -> dict:
    out = {"schema": SCHEMA, "schema_version": SCHEMA_VERSION, "tool_version": version,
           "command": command, "seed": seed}
    out.update(body)
    if timing is not None:
        out["timing"] = timing
    return out


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(headers, *rows)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    out += ["  ".join(str(x).ljust(w) for x, w in zip(row, widths)) for row in rows]
    return "\n".join(out)


def results_table(results: list[CrResult]) -> str:
    rows = [[r.model.label, value_text(r.value), r.method, r.status] for r in results]
    return table(["model", "value", "method", "status"], rows)
