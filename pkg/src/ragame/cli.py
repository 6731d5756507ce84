"""Command-line interface: ``ragame cr | verify | appendix | simulate``.

Exit codes: 0 success, 1 a lattice relation failed, 2 malformed input,
3 size cap exceeded, 4 unsupported model, algorithm or parameter.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cr_models import CrOptions, UnsupportedModelError, check_minimax, compute, compute_all, verify_theorem1
from .distributions import DistClass, Knowledge, ModelClass, RandomOrderDet, densify, make_rng
from .examples import (
    OddsInstance,
    appendix_lp,
    best_pick,
    bruss_algorithm,
    build_odds_game,
    builtin_game,
    expected_max,
    monte_carlo,
    prophet_threshold,
    random_game,
    secretary_rule,
    secretary_success_probability,
    selection_value,
    two_point_instance,
    win_probability,
)
from .game import GameError, Multiset, SizeCapError, build_game, to_fraction
from .report import (
    dumps,
    envelope,
    game_json,
    lattice_json,
    minimax_json,
    q,
    result_json,
    results_table,
    table,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_CAP, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4
BUILTINS = ("selection", "odds", "prediction-d", "prediction-e")


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line

    def __str__(self) -> str:
        prefix = f"line {self.line}: " if self.line is not None else ""
        return prefix + self.args[0]


class Unsupported(Exception):
    pass


# --- game files ------------------------------------------------------------


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _element_lines(text: str, key: str) -> list[int]:
    """Line of each element of the top-level array under ``key``."""
    m = re.search(r'"%s"\s*:\s*\[' % re.escape(key), text)
    if not m:
        return []
    dec = json.JSONDecoder()
    pos, lines = m.end(), []
    while True:
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text) or text[pos] == "]":
            return lines
        lines.append(_line_of(text, pos))
        try:
            _, pos = dec.raw_decode(text, pos)
        except json.JSONDecodeError:
            return lines


def _alphabet(spec, what: str) -> tuple[int, dict]:
    if isinstance(spec, bool):
        raise ParseError(f"{what} must be a count or a list of labels")
    if isinstance(spec, int):
        if spec < 1:
            raise ParseError(f"{what} count must be positive")
        return spec, {}
    if isinstance(spec, list) and spec and all(isinstance(x, str) for x in spec):
        if len(set(spec)) != len(spec):
            raise ParseError(f"duplicate {what} labels")
        return len(spec), {label: i for i, label in enumerate(spec)}
    raise ParseError(f"{what} must be a count or a list of labels")


def _symbols(seq, labels: dict, what: str) -> tuple[int, ...]:
    if not isinstance(seq, list):
        raise ParseError(f"{what} must be a list")
    out = []
    for x in seq:
        if isinstance(x, str) and x in labels:
            out.append(labels[x])
        elif isinstance(x, int) and not isinstance(x, bool):
            out.append(x)
        else:
            raise ParseError(f"unknown {what} symbol {x!r}")
    return tuple(out)


def _value(v) -> Fraction:
    if isinstance(v, float):
        raise ParseError(f"utility {v!r} is a float; write it as a \"p/q\" string")
    try:
        return to_fraction(v)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"bad utility value {v!r}") from exc


def _params(raw: dict) -> dict:
    out = {}
    for k, v in raw.items():
        if not isinstance(v, int) or isinstance(v, bool):
            raise ParseError(f"builtin parameter {k} must be an integer")
        out[k] = v
    return out


def load_builtin(name: str, params: dict):
    if name not in BUILTINS:
        raise Unsupported(f"unknown builtin game {name!r}; choose from {', '.join(BUILTINS)}")
    try:
        return builtin_game(name, **params)
    except TypeError as exc:
        raise ParseError(f"bad parameters for {name}: {exc}") from exc


def parse_game_text(text: str):
    """Parse a game file; returns ``(game, source description)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("game file must be a JSON object", 1)
    has_utility, has_builtin = "utility" in doc, "builtin" in doc
    if has_utility == has_builtin:
        raise ParseError("exactly one of 'utility' and 'builtin' is required")
    if has_builtin:
        spec = doc["builtin"]
        if not isinstance(spec, dict) or "name" not in spec:
            raise ParseError("'builtin' must be an object with a 'name'")
        params = _params(spec.get("params", {}))
        return load_builtin(spec["name"], params), {"builtin": spec["name"], "params": params}
    for key in ("n", "requests", "answers"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("n must be a positive integer")
    nr, rlabels = _alphabet(doc["requests"], "requests")
    na, alabels = _alphabet(doc["answers"], "answers")
    entries = doc["utility"]
    if not isinstance(entries, list):
        raise ParseError("'utility' must be a list")
    lines = _element_lines(text, "utility")
    items = []
    for i, e in enumerate(entries):
        line = lines[i] if i < len(lines) else None
        try:
            if not isinstance(e, dict) or not {"r", "a", "value"} <= set(e):
                raise ParseError("utility entry needs keys r, a and value")
            r = _symbols(e["r"], rlabels, "request")
            a = _symbols(e["a"], alabels, "answer")
            v = _value(e["value"])
            if v < 0:
                raise ParseError(f"negative utility {q(v)}")
            if len(r) != n or any(not 0 <= x < nr for x in r):
                raise ParseError(f"request sequence {list(r)} is not in R^{n}")
            if len(a) != n or any(not 0 <= x < na for x in a):
                raise ParseError(f"answer sequence {list(a)} is not in A^{n}")
        except ParseError as exc:
            raise ParseError(exc.args[0], line) from None
        items.append((r, a, v))
    name = doc.get("name", "game")
    return build_game(n, nr, na, items, name=str(name)), {"file": True}


def _builtin_params(pairs: list[str]) -> dict:
    out = {}
    for p in pairs or []:
        k, sep, v = p.partition("=")
        if not sep:
            raise ParseError(f"parameter {p!r} is not KEY=VALUE")
        try:
            out[k] = int(v)
        except ValueError as exc:
            raise ParseError(f"parameter {k} must be an integer") from exc
    return out


def _load(args):
    if getattr(args, "game_file", None):
        path = Path(args.game_file)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
        game, source = parse_game_text(text)
        source = {"file": str(path)} if source.get("file") else source
        return game, source
    if getattr(args, "builtin", None):
        params = _builtin_params(args.param)
        return load_builtin(args.builtin, params), {"builtin": args.builtin, "params": params}
    raise ParseError("a game file or --builtin is required")


# --- commands --------------------------------------------------------------


def _options(args) -> CrOptions:
    kw = {"seed": args.seed}
    if getattr(args, "tolerance", None) is not None:
        try:
            kw["tolerance"] = Fraction(args.tolerance)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad tolerance {args.tolerance!r}") from exc
        if kw["tolerance"] <= 0:
            raise ParseError("tolerance must be positive")
    if getattr(args, "grid_depth", None) is not None:
        kw["grid_depth"] = args.grid_depth
    kw["lipschitz"] = getattr(args, "lipschitz", False)
    kw["cross_check"] = getattr(args, "cross_check", False)
    return CrOptions(**kw)


def _emit(args, report: dict, text: str | None) -> None:
    if args.output == "-":
        sys.stdout.write(dumps(report))
        return
    if text:
        print(text)
    if args.output:
        Path(args.output).write_text(dumps(report))


def _timing(args, start: float):
    return {"seconds": round(time.perf_counter() - start, 6)} if args.timing else None


def cmd_cr(args) -> int:
    start = time.perf_counter()
    game, source = _load(args)
    options = _options(args)
    if args.model == "all":
        results = list(compute_all(game, options).values())
    else:
        results = [compute(game, ModelClass.of(args.model, args.knowledge), options)]
    body = {"game": game_json(game, source), "results": [result_json(r) for r in results]}
    report = envelope("cr", __version__, args.seed, body, _timing(args, start))
    _emit(args, report, f"{game.name}\n{results_table(results)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    start = time.perf_counter()
    options = _options(args)
    games = []
    if args.game_file or args.builtin:
        games.append(_load(args))
    elif args.all_builtins:
        games += [(builtin_game(name), {"builtin": name, "params": {}}) for name in BUILTINS]
    else:
        for s in range(args.seeds, args.seeds + args.count):
            games.append((random_game(s), {"random": s}))
    entries, rows, passed = [], [], True
    for game, source in games:
        rep = verify_theorem1(game, options)
        entry = {
            "game": game_json(game, source),
            "results": [result_json(r, witnesses=False) for r in rep.results.values()],
            "lattice": lattice_json(rep),
        }
        if args.minimax:
            mm = check_minimax(game)
            entry["minimax"] = minimax_json(mm)
            passed &= mm.equal
        entries.append(entry)
        passed &= rep.passed
        counts = {k: sum(v.verdict == k for v in (*rep.relations, *rep.lemma2)) for k in ("pass", "fail", "consistent")}
        rows.append([game.name, "pass" if rep.passed else "FAIL", str(counts["pass"]), str(counts["consistent"]),
                     str(counts["fail"])])
    report = envelope("verify", __version__, args.seed, {"games": entries, "passed": passed}, _timing(args, start))
    text = table(["game", "lattice", "pass", "consistent", "fail"], rows)
    if len(games) == 1:
        text = results_table(list(rep.results.values())) + "\n\n" + text
        text += "\n" + "\n".join(str(v) for v in rep.relations + rep.lemma2)
        text += "\n" + "\n".join(f"{a} vs {b}: {o}" for a, b, o in rep.unordered)
    _emit(args, report, text)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_appendix(args) -> int:
    start = time.perf_counter()
    if args.n < 1:
        raise ParseError("--n must be positive")
    if not args.float and math.isqrt(args.n) ** 2 != args.n:
        raise Unsupported(f"n={args.n} is not a perfect square; pass --float")
    res = appendix_lp(args.n, float_mode=args.float)
    fmt = q if res.exact else float
    body = {
        "n": res.n,
        "mode": "exact" if res.exact else "float",
        "primal_value": fmt(res.primal_value),
        "rstar_feasible": res.rstar_feasible,
        "rstar_value": fmt(res.rstar_value),
        "closed_form": fmt(res.closed_form),
        "rstar_equals_closed_form": res.rstar_matches_closed_form,
        "primal_le_closed_form": bool(res.primal_value <= res.closed_form),
        "primal_le_rstar": res.primal_below_rstar,
        "one_over_e": 1 / math.e,
        "distance_to_one_over_e": abs(float(res.rstar_value) - 1 / math.e),
    }
    report = envelope("appendix", __version__, None, body, _timing(args, start))
    rows = [[k, str(body[k])] for k in ("n", "mode", "primal_value", "rstar_feasible", "rstar_value", "closed_form",
                                        "rstar_equals_closed_form", "primal_le_closed_form", "primal_le_rstar",
                                        "distance_to_one_over_e")]
    _emit(args, report, table(["quantity", "value"], rows))
    return EXIT_OK


def _scenario(args):
    """``(algorithm, generator, game, value_fn, n, exact value, description)``."""
    params = _builtin_params(args.param)
    name, alg_name = args.builtin, args.algorithm
    if name == "odds" and alg_name == "bruss":
        n = params.get("n", 3)
        inst = OddsInstance.harmonic(n)
        alg = bruss_algorithm(inst)
        return alg, inst.product(), build_odds_game(n), None, n, win_probability(alg, inst), {"n": n}
    if name == "secretary" and alg_name == "secretary":
        n = params.get("n", 4)
        cutoff = params.get("cutoff", max(0, round(n / math.e)))
        if not 0 <= cutoff < n:
            raise Unsupported("cutoff must satisfy 0 <= cutoff < n")
        gen = RandomOrderDet(Multiset((0,) + (1,) * n))
        exact = secretary_success_probability(n, cutoff)
        return secretary_rule(n, cutoff), gen, None, best_pick, n, exact, {"n": n, "cutoff": cutoff}
    if name == "selection" and alg_name == "prophet-threshold":
        n, m = params.get("n", 3), params.get("m", 4)
        marg = two_point_instance(make_rng(args.seed), n, m)
        alg = prophet_threshold(marg)
        exact = selection_value(alg, densify(marg, (n, m + 1)), n)

        def value_fn(r, a):
            chosen = [i for i, x in enumerate(a) if x == 1]
            return r[chosen[0]] if len(chosen) == 1 else 0

        return alg, marg, None, value_fn, n, exact, {"n": n, "m": m, "expected_max": q(expected_max(marg))}
    raise Unsupported(f"unknown scenario {name!r} with algorithm {alg_name!r}; available: "
                      "odds/bruss, secretary/secretary, selection/prophet-threshold")


def cmd_simulate(args) -> int:
    start = time.perf_counter()
    if args.trials < 1:
        raise ParseError("--trials must be at least 1")
    alg, gen, game, value_fn, n, exact, params = _scenario(args)
    mc = monte_carlo(alg, gen, game, args.trials, args.seed, value_fn=value_fn, n=n)
    ci = {"lo": mc.ci_low, "hi": mc.ci_high, "width": None if mc.stderr is None else mc.ci_high - mc.ci_low}
    body = {
        "scenario": {"builtin": args.builtin, "algorithm": args.algorithm, "params": params},
        "trials": mc.trials,
        "estimate": mc.mean,
        "stderr": mc.stderr,
        "ci95": ci,
        "ci_defined": mc.stderr is not None,
        "exact": q(exact),
        "within_3_sigma": mc.within(exact),
    }
    report = envelope("simulate", __version__, args.seed, body, _timing(args, start))
    width = "undefined (fewer than 2 trials)" if mc.stderr is None else f"[{mc.ci_low:.6f}, {mc.ci_high:.6f}]"
    rows = [["estimate", f"{mc.mean:.6f}"], ["95% CI", width], ["exact", q(exact)], ["trials", str(mc.trials)],
            ["seed", str(args.seed)]]
    _emit(args, report, table(["quantity", "value"], rows))
    return EXIT_OK


# --- entry point -----------------------------------------------------------


def _common(p: argparse.ArgumentParser, game: bool = True, timing_default: bool = True) -> None:
    if game:
        p.add_argument("game_file", nargs="?", help="JSON game file")
        p.add_argument("--builtin", help=f"builtin game: {', '.join(BUILTINS)}")
        p.add_argument("--param", action="append", metavar="KEY=VALUE", help="builtin parameter (repeatable)")
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    p.add_argument("--output", "-o", default=None, help="write the JSON report here ('-' for stdout only)")
    p.add_argument("--timing", action=argparse.BooleanOptionalAction, default=timing_default,
                   help="include wall-clock timing in the report")


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tolerance", help="double-oracle bracket width, e.g. 1/1000")
    p.add_argument("--grid-depth", type=int, help="grid denominator exponent k (denominator 2^k)")
    p.add_argument("--lipschitz", action="store_true", help="certified upper bounds for known brackets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ragame", description="Competitive ratios of request-answer games.")
    parser.add_argument("--version", action="version", version=f"ragame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cr", help="competitive ratio under one input model")
    _common(p)
    _solver_flags(p)
    p.add_argument("--model", required=True, choices=[c.value for c in DistClass] + ["all"])
    p.add_argument("--knowledge", default="unknown", choices=[k.value for k in Knowledge])
    p.add_argument("--cross-check", action="store_true", help="exhaustive kCR_det instead of the identity")
    p.set_defaults(func=cmd_cr)

    p = sub.add_parser("verify", help="check the lattice of the twelve ratios")
    _common(p)
    _solver_flags(p)
    p.add_argument("--seeds", type=int, default=0, help="first seed for random games")
    p.add_argument("--count", type=int, default=100, help="number of random games")
    p.add_argument("--all-builtins", action="store_true")
    p.add_argument("--minimax", action="store_true", help="also compare inf-sup and sup-inf over point masses")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("appendix", help="optimal-stopping LP and its dual certificate")
    _common(p, game=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--float", action="store_true", help="floating-point mode for large or non-square n")
    p.set_defaults(func=cmd_appendix)

    p = sub.add_parser("simulate", help="Monte-Carlo estimate of a stopping rule")
    _common(p, game=False, timing_default=False)
    p.add_argument("--builtin", required=True, help="odds, secretary or selection")
    p.add_argument("--algorithm", required=True, help="bruss, secretary or prophet-threshold")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        where = f"{args.game_file}: " if getattr(args, "game_file", None) else ""
        print(f"error: {where}{exc}", file=sys.stderr)
        return EXIT_PARSE
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (Unsupported, UnsupportedModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except GameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
