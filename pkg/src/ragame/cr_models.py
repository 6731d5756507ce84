"""The twelve competitive ratios of a request-answer game.

For a class ``C`` of input distributions

    CR_C  = inf_ALG sup_{D in C} E_D[OPT] / E_D[ALG]     (distribution unknown)
    kCR_C = sup_{D in C} inf_ALG E_D[OPT] / E_D[ALG]     (distribution known)

with ``0/0 = 1``.  Unknown ratios over polyhedral hulls are one exact LP over
realization plans (:func:`cr_vertex_lp`).  The known i.i.d., independent and
random-order-independent ratios have no finite description and are reported
as certified brackets.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .distributions import (
    ALL_MODELS,
    Delta,
    DenseDistribution,
    DistClass,
    Iid,
    Knowledge,
    Mixture,
    ModelClass,
    Product,
    RandomOrderInd,
    densify,
    hull_vertices,
    make_rng,
)
from .game import Game, Seq, SizeCapError, compositions, multiset_of, size_cap
from .lp import EQ, GE, LE, LinearProgram, LpError, solve
from .simplex_sup import SupUnavailable, simplex_sup
from .strategies import (
    RealizationPlan,
    SequenceForm,
    best_response,
    plan_of_deterministic,
    values_by_request,
)

DEFAULT_VERTEX_LP_CAP = 100_000
INF = math.inf


class UnsupportedModelError(ValueError):
    """The requested model cannot be computed for this game."""


@dataclass(frozen=True)
class Exact:
    value: Fraction


@dataclass(frozen=True)
class Infinite:
    pass


INFINITE = Infinite()


@dataclass(frozen=True)
class Bracket:
    lo: Fraction
    hi: Fraction | float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"bracket lo {self.lo} exceeds hi {self.hi}")


CrValue = Exact | Infinite | Bracket


def interval(value: CrValue) -> tuple[Fraction | float, Fraction | float]:
    """``(lo, hi)`` with ``math.inf`` standing for an infinite ratio."""
    if isinstance(value, Exact):
        return value.value, value.value
    if isinstance(value, Infinite):
        return INF, INF
    return value.lo, value.hi


@dataclass(frozen=True)
class CrResult:
    model: ModelClass
    value: CrValue
    witness_distribution: object = None
    witness_plan: RealizationPlan | None = None
    method: str = "vertex-lp"
    status: str = "ok"
    details: Mapping = field(default_factory=dict, compare=False)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, (Exact, Infinite))

    def interval(self):
        return interval(self.value)


@dataclass(frozen=True)
class CrOptions:
    """Knobs for the non-polyhedral models.

    ``grid_depth`` is ``k`` in the grid denominator ``2**k``; it is lowered
    until the full grid has at most ``grid_budget`` points.  ``lipschitz``
    turns on a certified upper bound for the known brackets.
    """

    grid_depth: int = 5
    refine_levels: int = 4
    grid_budget: int = 2000
    starts: int = 8
    lipschitz: bool = False
    tolerance: Fraction = Fraction(1, 1000)
    max_rounds: int = 30
    seed: int = 0
    cross_check: bool = False
    exact_sup_dim: int = 2


def _ratio(num: Fraction, den: Fraction) -> Fraction | float:
    if den == 0:
        return Fraction(1) if num == 0 else INF
    return num / den


def _as_value(x: Fraction | float) -> CrValue:
    return INFINITE if x == INF else Exact(Fraction(x))


def expected_opt(game: Game, d: Mapping[Seq, Fraction]) -> Fraction:
    opt, idx = game.opt_table, game.r_index
    return sum((p * opt[idx(r)] for r, p in d.items()), Fraction(0))


def known_cr_fixed(game: Game, d: Mapping[Seq, Fraction]) -> Fraction | float:
    """``E_d[OPT] / max_ALG E_d[ALG]``; ``math.inf`` when only the numerator is positive."""
    _, den = best_response(game, d)
    return _ratio(expected_opt(game, d), den)


def _dense(g, game: Game) -> DenseDistribution:
    return g if isinstance(g, DenseDistribution) else densify(g, game)


def check_vertex_lp_size(game: Game, cap: int | None = None) -> int:
    size = SequenceForm.count(game)
    cap = size_cap(DEFAULT_VERTEX_LP_CAP) if cap is None else cap
    if size > cap:
        raise SizeCapError("vertex LP variables", size, cap)
    return size


def cr_vertex_lp(
    game: Game, vertices: Sequence, model: ModelClass | None = None, cap: int | None = None
) -> CrResult:
    """``inf_x max_v E_v[OPT] / E_v[ALG_x]`` over realization plans ``x``.

    Maximizes ``lam`` subject to the flow constraints and
    ``alg_value(x, v) >= lam * E_v[OPT]`` for each vertex with positive
    ``E_v[OPT]``.  The optimal duals of the vertex rows give the worst mixture
    of vertices, returned as the witness distribution.
    """
    if not vertices:
        raise ValueError("at least one vertex is required")
    model = model or ModelClass(DistClass.DEP, Knowledge.UNKNOWN)
    check_vertex_lp_size(game, cap)
    sf = SequenceForm(game)
    lam = sf.size
    dense = [_dense(v, game) for v in vertices]
    opts = [expected_opt(game, d) for d in dense]
    active = [i for i, o in enumerate(opts) if o > 0]
    if not active:
        alg, _ = best_response(game, dense[0])
        return CrResult(model, Exact(Fraction(1)), vertices[0], plan_of_deterministic(alg, game), "vertex-lp",
                        details={"lambda": "1", "vertices": len(vertices)})
    lp = LinearProgram(sf.size + 1, "max", {lam: 1}, sf.flow_constraints())
    rows = {}
    for i in active:
        coeffs = sf.value_coeffs(dense[i])
        coeffs[lam] = -opts[i]
        rows[i] = lp.add(coeffs, GE, 0)
    sol = solve(lp)
    if not sol.optimal:
        raise LpError(f"vertex LP ended with status {sol.status}")
    plan = sf.plan(sol.primal)
    weights = {i: -sol.dual[rows[i]] for i in active if sol.dual[rows[i]]}
    total = sum(weights.values())
    if total:
        order = sorted(weights)
        witness = Mixture(tuple(weights[i] / total for i in order), tuple(vertices[i] for i in order))
    else:
        witness = vertices[active[0]]
    details = {"lambda": sol.value, "vertices": len(vertices), "pivots": sol.pivots}
    if sol.value == 0:
        return CrResult(model, INFINITE, witness, plan, "vertex-lp", details=details)
    return CrResult(model, Exact(1 / sol.value), witness, plan, "vertex-lp", details=details)


def plan_ratio(game: Game, plan, d: Mapping[Seq, Fraction]) -> Fraction | float:
    """``E_d[OPT] / E_d[ALG_plan]``."""
    values = values_by_request(plan, game)
    return _ratio(expected_opt(game, d), sum((p * values[r] for r, p in d.items()), Fraction(0)))


# --- parameter grids -------------------------------------------------------


def _simplex_grid(denominator: int, k: int) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(c, denominator) for c in comp) for comp in compositions(denominator, k)]


def _grid_size(cls: DistClass, n: int, k: int, denominator: int) -> int:
    m = math.comb(denominator + k - 1, k - 1)
    if cls is DistClass.IID:
        return m
    if cls is DistClass.IND:
        return m**n
    return math.comb(m + n - 1, n)


def _generator(cls: DistClass, point: tuple) -> object:
    if cls is DistClass.IID:
        return Iid(point[0])
    if cls is DistClass.IND:
        return Product(point)
    return RandomOrderInd(point)


def _canonical(cls: DistClass, point: tuple) -> tuple:
    return tuple(sorted(point)) if cls is DistClass.RI else point


def _grid_points(cls: DistClass, n: int, k: int, denominator: int):
    marg = _simplex_grid(denominator, k)
    if cls is DistClass.IID:
        return [(m,) for m in marg]
    if cls is DistClass.IND:
        return list(itertools.product(marg, repeat=n))
    return list(itertools.combinations_with_replacement(marg, n))


def _neighbours(point: tuple, step: Fraction):
    for mi, marginal in enumerate(point):
        for j, l in itertools.permutations(range(len(marginal)), 2):
            if marginal[j] >= step:
                m = list(marginal)
                m[j] -= step
                m[l] += step
                yield point[:mi] + (tuple(m),) + point[mi + 1 :]


def _hill_climb(evaluate, point: tuple, step: Fraction, limit: int = 200):
    value = evaluate(point)
    for _ in range(limit):
        if value == INF:
            break
        best, best_val = None, value
        for nb in _neighbours(point, step):
            v = evaluate(nb)
            if v > best_val:
                best, best_val = nb, v
        if best is None:
            break
        point, value = best, best_val
    return point, value


def _choose_depth(cls: DistClass, n: int, k: int, options: CrOptions) -> int:
    depth = options.grid_depth
    while depth > 0 and _grid_size(cls, n, k, 2**depth) > options.grid_budget:
        depth -= 1
    return depth


def _tv_radius(n: int, k: int, denominator: int) -> Fraction:
    # rounding a marginal to the grid moves each coordinate by < 1/N
    return Fraction(n * k, 2 * denominator)


def known_grid_bracket(game: Game, cls: DistClass, options: CrOptions | None = None) -> CrResult:
    """Lower bound on ``kCR`` for iid/ind/ri from an exact grid plus local refinement."""
    options = options or CrOptions()
    n, k = game.n, game.request_count
    model = ModelClass(cls, Knowledge.KNOWN)
    cache: dict[tuple, Fraction | float] = {}
    brs: dict[tuple, tuple[Fraction, Fraction]] = {}

    def evaluate(point):
        key = _canonical(cls, point)
        if key not in cache:
            d = densify(_generator(cls, key), game)
            _, br = best_response(game, d)
            num = expected_opt(game, d)
            brs[key] = (num, br)
            cache[key] = _ratio(num, br)
        return cache[key]

    depth = _choose_depth(cls, n, k, options)
    denominator = 2**depth
    grid = _grid_points(cls, n, k, denominator)
    scored = sorted(((evaluate(p), i) for i, p in enumerate(grid)), reverse=True)
    hi: Fraction | float = INF
    if options.lipschitz:
        fmax = game.max_utility
        t = _tv_radius(n, k, denominator)
        hi = Fraction(0)
        for p in grid:
            num, br = brs[_canonical(cls, p)]
            if br <= fmax * t:
                hi = INF
                break
            hi = max(hi, (num + fmax * t) / (br - fmax * t))
    best_point, best_val = grid[scored[0][1]], scored[0][0]
    if best_val != INF:
        for _, i in scored[: options.starts]:
            point, step = grid[i], Fraction(1, denominator)
            value = evaluate(point)
            for _level in range(options.refine_levels + 1):
                point, value = _hill_climb(evaluate, point, step)
                step /= 2
            if value > best_val:
                best_point, best_val = point, value
    witness = _generator(cls, _canonical(cls, best_point))
    details = {"grid_denominator": denominator, "refine_levels": options.refine_levels,
               "evaluations": len(cache), "lipschitz": options.lipschitz}
    if best_val == INF:
        return CrResult(model, INFINITE, witness, None, "grid", details=details)
    alg, _ = best_response(game, densify(witness, game))
    value = Bracket(best_val, max(hi, best_val))
    return CrResult(model, value, witness, plan_of_deterministic(alg, game), "grid", details=details)


# --- unknown i.i.d. --------------------------------------------------------


def _monomials(game: Game, values: Mapping[Seq, Fraction]) -> dict[tuple[int, ...], Fraction]:
    out: dict[tuple[int, ...], Fraction] = {}
    for r, v in values.items():
        if v:
            c = multiset_of(r, game.request_count).counts
            out[c] = out.get(c, 0) + v
    return out


def _poly_value(mono: Mapping[tuple[int, ...], Fraction], p: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for counts, c in mono.items():
        term = c
        for pj, e in zip(p, counts):
            if e:
                term *= pj**e
        total += term
    return total


def _opt_monomials(game: Game) -> dict[tuple[int, ...], Fraction]:
    return _monomials(game, {r: game.opt_table[i] for i, r in enumerate(game.requests())})


def iid_plan_sup(game: Game, plan, options: CrOptions | None = None):
    """``sup_p E_{Iid(p)}[OPT] / E_{Iid(p)}[ALG_plan]``: ``(value, argmax, method)``.

    Exact via critical points when the simplex is small enough, otherwise a
    certified grid bound with total-variation slack.
    """
    options = options or CrOptions()
    num = _opt_monomials(game)
    den = _monomials(game, values_by_request(plan, game))
    k = game.request_count
    try:
        res = simplex_sup(num, den, k, options.exact_sup_dim)
        return res.value, res.argmax, "critical-points" if res.exact else "critical-points-rounded"
    except SupUnavailable:
        pass
    denominator = 2 ** max(options.grid_depth, 1)
    t = _tv_radius(game.n, k, denominator)
    fmax = game.max_utility
    hi: Fraction | float = Fraction(0)
    arg = None
    for q in _simplex_grid(denominator, k):
        a, b = _poly_value(num, q), _poly_value(den, q)
        if b <= fmax * t:
            return INF, q, "grid-slack"
        bound = (a + fmax * t) / (b - fmax * t)
        if bound > hi:
            hi, arg = bound, q
    return hi, arg, "grid-slack"


def _round_to_grid(p: Sequence[Fraction], denominator: int) -> tuple[Fraction, ...]:
    counts = [math.floor(x * denominator) for x in p]
    deficit = denominator - sum(counts)
    order = sorted(range(len(p)), key=lambda j: p[j] * denominator - counts[j], reverse=True)
    for j in order[:deficit]:
        counts[j] += 1
    return tuple(Fraction(c, denominator) for c in counts)


def _adversary_points(game: Game, plan, argmax, options: CrOptions, rng) -> list[tuple[Fraction, ...]]:
    num = _opt_monomials(game)
    den = _monomials(game, values_by_request(plan, game))
    k = game.request_count
    cache = {}

    def evaluate(point):
        if point not in cache:
            cache[point] = _ratio(_poly_value(num, point[0]), _poly_value(den, point[0]))
        return cache[point]

    denominator = 2 ** options.grid_depth
    starts = []
    if argmax:
        starts.append(_round_to_grid(argmax, denominator))
    for _ in range(options.starts - len(starts)):
        w = rng.dirichlet([1.0] * k)
        starts.append(_round_to_grid([Fraction(float(x)).limit_denominator(denominator) for x in w], denominator))
    found = []
    for s in starts:
        point, step = (s,), Fraction(1, denominator)
        for _level in range(options.refine_levels + 1):
            point, _ = _hill_climb(evaluate, point, step)
            step /= 2
        found.append((evaluate(point), point[0]))
    found.sort(reverse=True)
    out = [p for _, p in found]
    if argmax and all(x >= 0 for x in argmax) and sum(argmax) == 1:
        out.insert(0, tuple(argmax))
    return out


def cr_iid_double_oracle(
    game: Game, tolerance: Fraction | None = None, max_rounds: int | None = None, options: CrOptions | None = None
) -> CrResult:
    """Bracket on ``CR_iid``.

    ``lo`` is the vertex-LP ratio against the finite set of i.i.d. generators
    found so far (restricting the adversary can only lower the ratio).  ``hi``
    is the worst ratio of the best plan seen over the whole simplex.  Each
    round adds the adversary's best responses to the current plan.
    """
    options = options or CrOptions()
    tolerance = options.tolerance if tolerance is None else Fraction(tolerance)
    max_rounds = options.max_rounds if max_rounds is None else max_rounds
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    model = ModelClass(DistClass.IID, Knowledge.UNKNOWN)
    k = game.request_count
    rng = make_rng(options.seed)
    marginals = [tuple([Fraction(1, k)] * k)]
    marginals += [tuple(Fraction(int(i == j)) for i in range(k)) for j in range(k)]
    hi: Fraction | float = INF
    best_plan, hi_method = None, None
    lo_result = None
    rounds, status = 0, "not-converged"
    for rounds in range(1, max_rounds + 1):
        lo_result = cr_vertex_lp(game, [Iid(m) for m in marginals], model)
        if isinstance(lo_result.value, Infinite):
            return CrResult(model, INFINITE, lo_result.witness_distribution, None, "double-oracle",
                            details={"rounds": rounds, "generators": len(marginals)})
        lo = lo_result.value.value
        plan = lo_result.witness_plan
        plan_hi, argmax, how = iid_plan_sup(game, plan, options)
        if plan_hi < hi:
            hi, best_plan, hi_method = plan_hi, plan, how
        if hi - lo <= tolerance:
            status = "ok"
            break
        fresh = [p for p in _adversary_points(game, plan, argmax, options, rng) if p not in marginals]
        if not fresh:
            break
        marginals.extend(dict.fromkeys(fresh[:2]))
    lo = lo_result.value.value
    details = {"rounds": rounds, "generators": len(marginals), "hi_method": hi_method,
               "tolerance": tolerance}
    return CrResult(model, Bracket(lo, max(hi, lo)), lo_result.witness_distribution, best_plan,
                    "double-oracle", status, details)


# --- dispatch --------------------------------------------------------------


def _exhaustive_known(game: Game, model: ModelClass, vertices) -> CrResult:
    best, arg = None, None
    for g in vertices:
        v = known_cr_fixed(game, densify(g, game))
        if best is None or v > best:
            best, arg = v, g
        if best == INF:
            break
    alg, _ = best_response(game, densify(arg, game))
    return CrResult(model, _as_value(best), arg, plan_of_deterministic(alg, game), "exhaustive-known",
                    details={"vertices": len(vertices)})


def compute(game: Game, model: ModelClass, options: CrOptions | None = None) -> CrResult:
    """Competitive ratio of ``game`` under ``model``."""
    options = options or CrOptions()
    cls, known = model.cls, model.knowledge is Knowledge.KNOWN
    if cls is DistClass.DET and known:
        if options.cross_check:
            return _exhaustive_known(game, model, hull_vertices(cls, game))
        r0 = next(game.requests())
        alg, _ = best_response(game, densify(Delta(r0), game))
        return CrResult(model, Exact(Fraction(1)), Delta(r0), plan_of_deterministic(alg, game), "lemma4")
    if cls in (DistClass.DEP, DistClass.DET, DistClass.IND) and not known or cls is DistClass.DEP:
        return cr_vertex_lp(game, hull_vertices(cls, game), model)
    if cls in (DistClass.RD, DistClass.RI) and not known:
        return cr_vertex_lp(game, hull_vertices(cls, game), model)
    if cls is DistClass.RD:
        return _exhaustive_known(game, model, hull_vertices(cls, game))
    if known:
        return known_grid_bracket(game, cls, options)
    if cls is DistClass.IID:
        check_vertex_lp_size(game)
        return cr_iid_double_oracle(game, options=options)
    raise UnsupportedModelError(f"{model.label} is not supported")


def compute_all(game: Game, options: CrOptions | None = None) -> dict[str, CrResult]:
    """All twelve ratios keyed by label; polyhedral LPs shared across equal hulls."""
    options = options or CrOptions()
    out: dict[str, CrResult] = {}
    delta_lp = psi_lp = None
    for model in ALL_MODELS:
        cls, known = model.cls, model.knowledge is Knowledge.KNOWN
        if cls in (DistClass.DEP, DistClass.DET, DistClass.IND) and (not known or cls is DistClass.DEP):
            if delta_lp is None:
                delta_lp = compute(game, model, options)
            out[model.label] = _relabel(delta_lp, model)
        elif cls in (DistClass.RD, DistClass.RI) and not known:
            if psi_lp is None:
                psi_lp = compute(game, model, options)
            out[model.label] = _relabel(psi_lp, model)
        else:
            out[model.label] = compute(game, model, options)
    return out


def _relabel(res: CrResult, model: ModelClass) -> CrResult:
    return CrResult(model, res.value, res.witness_distribution, res.witness_plan, res.method, res.status,
                    res.details)


# --- lattice ---------------------------------------------------------------

LATTICE = (
    ("kCR_det", "<=", "kCR_iid"),
    ("kCR_iid", "<=", "CR_iid"),
    ("CR_iid", "<=", "CR_rd"),
    ("CR_rd", "=", "CR_ri"),
    ("CR_ri", "<=", "kCR_dep"),
    ("kCR_dep", "=", "CR_det"),
    ("CR_det", "=", "CR_ind"),
    ("CR_ind", "=", "CR_dep"),
    ("kCR_det", "<=", "kCR_rd"),
    ("kCR_rd", "<=", "kCR_ri"),
    ("kCR_ri", "<=", "CR_ri"),
    ("kCR_iid", "<=", "kCR_ri"),
    ("kCR_iid", "<=", "kCR_ind"),
    ("kCR_ind", "<=", "kCR_dep"),
)

# pairs the lattice leaves incomparable; their observed order is reported only
UNORDERED = (
    ("CR_rd", "kCR_ind"),
    ("CR_iid", "kCR_ri"),
    ("CR_iid", "kCR_ind"),
    ("kCR_rd", "kCR_iid"),
    ("kCR_rd", "kCR_ind"),
)

LEMMA2 = tuple((f"kCR_{c.value}", "<=", f"CR_{c.value}") for c in DistClass)


@dataclass(frozen=True)
class RelationVerdict:
    lhs: str
    relation: str
    rhs: str
    verdict: str  # pass | fail | consistent
    exact: bool

    def __str__(self) -> str:
        return f"{self.lhs} {self.relation} {self.rhs}: {self.verdict}"


def compare(a: CrValue, relation: str, b: CrValue) -> tuple[str, bool]:
    """Verdict of ``a <= b`` or ``a = b`` and whether it was decided exactly."""
    a_lo, a_hi = interval(a)
    b_lo, b_hi = interval(b)
    exact = a_lo == a_hi and b_lo == b_hi
    if relation == "=":
        if exact:
            return ("pass" if a_lo == b_lo else "fail"), True
        if a_lo > b_hi or b_lo > a_hi:
            return "fail", False
        return "consistent", False
    if a_lo > b_hi:
        return "fail", exact
    if a_hi <= b_lo:
        return "pass", exact
    return "consistent", False


def observed_order(a: CrValue, b: CrValue) -> str:
    a_lo, a_hi = interval(a)
    b_lo, b_hi = interval(b)
    if a_hi < b_lo:
        return "<"
    if a_lo > b_hi:
        return ">"
    if a_lo == a_hi == b_lo == b_hi:
        return "="
    return "undecided"


@dataclass
class LatticeReport:
    results: dict[str, CrResult]
    relations: list[RelationVerdict]
    lemma2: list[RelationVerdict]
    unordered: list[tuple[str, str, str]]

    @property
    def passed(self) -> bool:
        return all(v.verdict != "fail" for v in (*self.relations, *self.lemma2))

    @property
    def failures(self) -> list[RelationVerdict]:
        return [v for v in (*self.relations, *self.lemma2) if v.verdict == "fail"]


def check_relations(results: Mapping[str, CrResult], relations=LATTICE) -> list[RelationVerdict]:
    out = []
    for lhs, rel, rhs in relations:
        if lhs in results and rhs in results:
            verdict, exact = compare(results[lhs].value, rel, results[rhs].value)
            out.append(RelationVerdict(lhs, rel, rhs, verdict, exact))
    return out


def verify_theorem1(game: Game, options: CrOptions | None = None,
                    results: Mapping[str, CrResult] | None = None) -> LatticeReport:
    """Evaluate every lattice relation between the twelve ratios."""
    results = dict(results) if results is not None else compute_all(game, options)
    unordered = [
        (a, b, observed_order(results[a].value, results[b].value) + " (not ordered by the lattice)")
        for a, b in UNORDERED
    ]
    return LatticeReport(results, check_relations(results), check_relations(results, LEMMA2), unordered)


# --- minimax cross-check ---------------------------------------------------


@dataclass(frozen=True)
class MinimaxReport:
    inf_sup: CrValue
    sup_inf: CrValue | None
    equal: bool
    rounds: int
    converged: bool
    responders: int


def check_minimax(game: Game, vertices: Sequence | None = None, max_rounds: int = 500) -> MinimaxReport:
    """Compare ``inf_ALG sup_D`` (vertex LP) with ``sup_D inf_ALG`` (double oracle).

    The adversary mixes ``vertices`` (all point masses by default); each round
    it solves ``min t`` subject to ``sum_v y_v E_v[OPT] = 1`` and
    ``sum_v y_v E_v[ALG_a] <= t`` for every responder ``a`` found so far, and
    the best response to the normalized ``y`` joins the responder set.
    """
    vertices = list(vertices) if vertices is not None else [Delta(r) for r in game.requests()]
    inf_sup = cr_vertex_lp(game, vertices).value
    dense = [densify(v, game) for v in vertices]
    opts = [expected_opt(game, d) for d in dense]
    if not any(opts):
        return MinimaxReport(inf_sup, Exact(Fraction(1)), inf_sup == Exact(Fraction(1)), 0, True, 0)
    uniform = _mix_dense(dense, [Fraction(1, len(dense))] * len(dense))
    responders = [best_response(game, uniform)[0]]
    m = len(vertices)
    t = m
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        lp = LinearProgram(m + 1, "min", {t: 1})
        lp.add({i: o for i, o in enumerate(opts)}, EQ, 1)
        for alg in responders:
            coeffs = {i: _alg_on(game, alg, d) for i, d in enumerate(dense)}
            coeffs[t] = -1
            lp.add(coeffs, LE, 0)
        sol = solve(lp)
        if not sol.optimal:
            raise LpError(f"adversary LP ended with status {sol.status}")
        y = sol.primal[:m]
        mass = sum(y)
        d = _mix_dense(dense, [w / mass for w in y])
        alg, value = best_response(game, d)
        # value is per unit mass; the restricted game pays t per total mass
        if value * mass <= sol.value:
            sup_inf = INFINITE if sol.value == 0 else Exact(1 / sol.value)
            return MinimaxReport(inf_sup, sup_inf, sup_inf == inf_sup, rounds, True, len(responders))
        responders.append(alg)
    return MinimaxReport(inf_sup, None, False, rounds, False, len(responders))


def _alg_on(game: Game, alg, d: Mapping[Seq, Fraction]) -> Fraction:
    return sum((p * game.f(r, alg.answers(r)) for r, p in d.items()), Fraction(0))


def _mix_dense(dense: Sequence[DenseDistribution], weights: Sequence[Fraction]) -> DenseDistribution:
    acc: dict[Seq, Fraction] = {}
    for w, d in zip(weights, dense):
        if w:
            for r, p in d.items():
                acc[r] = acc.get(r, 0) + w * p
    n, k = dense[0].n, dense[0].request_count
    return DenseDistribution(acc, n, k, check=False)
