"""Concrete games, classical stopping rules and small numerical experiments.

Builders for the online selection game, the odds game and the membership
prediction games, plus Bruss's odds rule, the secretary cutoff rule, the
half-of-expected-maximum threshold rule, the optimal-stopping LP for the odds
game with i.i.d. success probability ``1/sqrt(n)``, and a seeded Monte-Carlo
evaluator.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .distributions import DenseDistribution, Product, RandomOrderDet, densify, expectation, make_rng, sample_with
from .game import DomainError, Game, Multiset, Seq, check_table_size, to_fraction
from .lp import LE, LinearProgram, check_feasible, dual_of, solve
from .strategies import DeterministicAlgorithm, RealizationPlan, alg_value

BUILTIN_NAMES = ("selection", "odds", "prediction-d", "prediction-e")


@dataclass(frozen=True)
class SelectionInstance:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DomainError("selection game needs m >= 1 and n >= 1")


@dataclass(frozen=True)
class OddsInstance:
    success_probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(to_fraction(p) for p in self.success_probs)
        if any(not 0 <= p <= 1 for p in probs):
            raise DomainError("success probabilities must lie in [0, 1]")
        object.__setattr__(self, "success_probs", probs)

    @property
    def n(self) -> int:
        return len(self.success_probs)

    def product(self) -> Product:
        return Product(tuple((1 - p, p) for p in self.success_probs))

    @classmethod
    def harmonic(cls, n: int) -> OddsInstance:
        """``p_i = 1/i``: the classical no-information secretary problem."""
        return cls(tuple(Fraction(1, i) for i in range(1, n + 1)))


@dataclass(frozen=True)
class LastPairIncreasingPermutation:
    """Permutations of ``0..n-1`` whose last entry exceeds the one before it."""


@dataclass(frozen=True)
class SingleSequence:
    r: Seq


@dataclass(frozen=True)
class ExplicitSet:
    members: tuple[Seq, ...]


PredictionSpec = LastPairIncreasingPermutation | SingleSequence | ExplicitSet


def _membership(spec, n: int) -> Callable[[Seq], bool]:
    if isinstance(spec, LastPairIncreasingPermutation):
        if n < 2:
            raise DomainError("the last-pair rule needs n >= 2")
        return lambda r: sorted(r) == list(range(n)) and r[-1] > r[-2]
    if isinstance(spec, SingleSequence):
        target = tuple(spec.r)
        return lambda r: r == target
    if isinstance(spec, ExplicitSet):
        members = {tuple(m) for m in spec.members}
        return lambda r: r in members
    raise TypeError(f"unknown prediction spec {spec!r}")


def build_selection_game(inst: SelectionInstance) -> Game:
    """Values ``0..m``; utility is the single selected value, 0 for none or several."""

    def f(r, a):
        chosen = [i for i, x in enumerate(a) if x == 1]
        return r[chosen[0]] if len(chosen) == 1 else 0

    return Game.from_function(inst.n, inst.m + 1, 2, f, name=f"selection(m={inst.m},n={inst.n})")


def _last_success(r: Seq) -> int | None:
    for i in range(len(r) - 1, -1, -1):
        if r[i] == 1:
            return i
    return None


def build_odds_game(n: int) -> Game:
    """Win (utility 1) by selecting exactly the last success; all-failure inputs always pay 1."""

    def f(r, a):
        last = _last_success(r)
        if last is None:
            return 1
        chosen = [i for i, x in enumerate(a) if x == 1]
        return 1 if chosen == [last] else 0

    return Game.from_function(n, 2, 2, f, name=f"odds(n={n})")


def odds_chain_distribution(n: int) -> DenseDistribution:
    """Uniform over the ``n`` sequences ``1^i 0^(n-i)``, ``i = 1..n``."""
    if n < 1:
        raise DomainError("n must be positive")
    mass = {tuple([1] * i + [0] * (n - i)): Fraction(1, n) for i in range(1, n + 1)}
    return DenseDistribution(mass, n, 2)


def build_prediction_game(spec, request_count: int, n: int) -> Game:
    """Predict with the first answer whether ``r`` lies in the set; later answers are ignored."""
    member = _membership(spec, n)
    check_table_size(n, request_count, 2)
    if isinstance(spec, (SingleSequence, ExplicitSet)):
        seqs = [spec.r] if isinstance(spec, SingleSequence) else spec.members
        for s in seqs:
            if len(s) != n or any(not 0 <= x < request_count for x in s):
                raise DomainError(f"set member {tuple(s)} is not in R^n")

    def f(r, a):
        return 1 if member(r) == (a[0] == 1) else 0

    label = type(spec).__name__
    return Game.from_function(n, request_count, 2, f, name=f"prediction[{label}](n={n})")


def prediction_d(n: int) -> Game:
    return build_prediction_game(LastPairIncreasingPermutation(), n, n)


def prediction_e(n: int) -> Game:
    return build_prediction_game(SingleSequence(tuple([0] * (n - 1) + [1])), 2, n)


def prediction_e_witness(n: int) -> Product:
    """First ``n-1`` requests are 0 surely, the last is a fair coin."""
    zero = (Fraction(1), Fraction(0))
    coin = (Fraction(1, 2), Fraction(1, 2))
    return Product(tuple([zero] * (n - 1) + [coin]))


def builtin_game(name: str, **params) -> Game:
    if name == "selection":
        return build_selection_game(SelectionInstance(params.get("m", 2), params.get("n", 2)))
    if name == "odds":
        return build_odds_game(params.get("n", 3))
    if name == "prediction-d":
        return prediction_d(params.get("n", 3))
    if name == "prediction-e":
        return prediction_e(params.get("n", 3))
    raise KeyError(name)


def tail_odds(inst: OddsInstance, i: int) -> Fraction | float:
    """``sum_{j > i} p_j / (1 - p_j)`` (0-based ``i``); ``inf`` if some later ``p_j == 1``."""
    total = Fraction(0)
    for p in inst.success_probs[i + 1 :]:
        if p == 1:
            return math.inf
        total += p / (1 - p)
    return total


def bruss_algorithm(inst: OddsInstance) -> DeterministicAlgorithm:
    """Select the first success from the index where the remaining odds sum drops below 1."""
    stop_ok = [tail_odds(inst, i) < 1 for i in range(inst.n)]

    def rule(rp, past):
        i = len(rp) - 1
        return int(rp[i] == 1 and stop_ok[i] and 1 not in past)

    return DeterministicAlgorithm.lazy(inst.n, rule)


def win_probability(alg, inst: OddsInstance, include_all_zero: bool = True) -> Fraction:
    """Exact value of ``alg`` on the odds game under the product distribution of ``inst``.

    With ``include_all_zero=False`` the mass of the all-failure input is removed,
    giving the classical probability of selecting the last success.
    """
    game = build_odds_game(inst.n)
    d = densify(inst.product(), game)
    value = alg_value(alg, d, game)
    if not include_all_zero:
        value -= d[tuple([0] * inst.n)]
    return value


def secretary_rule(n: int, cutoff: int) -> DeterministicAlgorithm:
    """Skip ``cutoff`` values, then take the first value strictly above everything seen."""
    if not 0 <= cutoff < n:
        raise DomainError("cutoff must satisfy 0 <= cutoff < n")

    def rule(rp, past):
        i = len(rp) - 1
        if i < cutoff or 1 in past:
            return 0
        return int(all(rp[i] > v for v in rp[:i]))

    return DeterministicAlgorithm.lazy(n, rule)


def expected_max(marginals: Product) -> Fraction:
    d = densify(marginals, (len(marginals.marginals), len(marginals.marginals[0])))
    return expectation(d, max)


def prophet_threshold(marginals: Product) -> DeterministicAlgorithm:
    """Take the first value at least half the expected maximum."""
    tau = expected_max(marginals) / 2

    def rule(rp, past):
        return int(1 not in past and rp[-1] >= tau)

    return DeterministicAlgorithm.lazy(len(marginals.marginals), rule)


def selection_value(alg, d, n: int) -> Fraction:
    """``E[ALG]`` on the selection game without tabulating its utility."""
    total = Fraction(0)
    for r, p in d.items():
        chosen = [i for i, x in enumerate(alg.answers(r)) if x == 1]
        if len(chosen) == 1:
            total += p * r[chosen[0]]
    return total


def best_pick(r: Seq, a: Seq) -> int:
    """1 if exactly one value was selected and it is a maximum of ``r``."""
    chosen = [i for i, x in enumerate(a) if x == 1]
    return int(len(chosen) == 1 and r[chosen[0]] == max(r))


def secretary_success_probability(n: int, cutoff: int) -> Fraction:
    """Exact best-pick probability under a uniformly random order of ``n`` distinct values."""
    alg = secretary_rule(n, cutoff)
    d = densify(RandomOrderDet(Multiset((0,) + (1,) * n)), (n, n + 1))
    return expectation(d, lambda r: best_pick(r, alg.answers(r)))


# --- the optimal-stopping LP for i.i.d. success probability 1/sqrt(n) ---


@dataclass(frozen=True)
class AppendixLpResult:
    n: int
    primal_value: Fraction | float
    rstar_feasible: bool
    rstar_value: Fraction | float
    closed_form: Fraction | float
    exact: bool = True
    primal_feasible_value: Fraction | float | None = None

    @property
    def rstar_matches_closed_form(self) -> bool:
        return self.rstar_value == self.closed_form if self.exact else abs(self.rstar_value - self.closed_form) < 1e-12

    @property
    def primal_below_rstar(self) -> bool:
        return self.primal_value <= self.rstar_value if self.exact else self.primal_value <= self.rstar_value + 1e-12


def _isqrt_exact(n: int) -> int | None:
    s = math.isqrt(n)
    return s if s * s == n else None


def stopping_lp(n: int, root: int) -> LinearProgram:
    """Maximize ``sum rho^(n-i) q_i`` s.t. ``root*q_i + sum_{j<i} q_j <= 1``, ``rho = 1 - 1/root``."""
    rho = 1 - Fraction(1, root)
    lp = LinearProgram(n, "max", [rho ** (n - i) for i in range(1, n + 1)], var_names=[f"q{i}" for i in range(1, n + 1)])
    for i in range(n):
        coeffs = {j: Fraction(1) for j in range(i)}
        coeffs[i] = Fraction(root)
        lp.add(coeffs, LE, 1, f"stop{i + 1}")
    return lp


def rstar(n: int, root) -> list:
    """``r*_i = max(rho^(n-i)/root - (n-i)/n * rho^(n-i-1), 0)`` for ``i = 1..n``."""
    rho = 1 - 1 / root if not isinstance(root, int) else 1 - Fraction(1, root)
    out = []
    for i in range(1, n + 1):
        k = n - i
        v = rho**k / root - (Fraction(k, n) * rho ** (k - 1) if k else 0)
        out.append(v if v > 0 else 0 * v)
    return out


def rstar_closed_form(n: int):
    """Exact value of ``sum r*_i``: ``s * rho^(s-1) / sqrt(n)`` with ``s = floor(sqrt(n))``.

    For perfect squares this is ``rho^(sqrt(n) - 1)``.
    """
    s = math.isqrt(n)
    root = _isqrt_exact(n)
    if root is not None:
        rho = 1 - Fraction(1, root)
        return rho ** (s - 1)
    rho = 1 - 1 / math.sqrt(n)
    return s * rho ** (s - 1) / math.sqrt(n)


def appendix_lp(n: int, float_mode: bool = False) -> AppendixLpResult:
    """Build, solve and certify the optimal-stopping LP.

    Exact mode needs a perfect square ``n``.  Float mode works for any ``n``
    without forming the LP: it evaluates ``r*`` (dual objective, with an
    O(n) suffix-sum feasibility check at 1e-12) and the threshold strategy
    that selects the first success among the last ``floor(sqrt(n)) - 1``
    variables (a primal feasible point).
    """
    if n < 1:
        raise DomainError("n must be positive")
    root = _isqrt_exact(n)
    s = math.isqrt(n)
    if not float_mode:
        if root is None:
            raise DomainError(f"{n} is not a perfect square; use float mode")
        lp = stopping_lp(n, root)
        sol = solve(lp)
        dual = dual_of(lp)
        r = rstar(n, root)
        feasible = bool(check_feasible(dual, r))
        rho = 1 - Fraction(1, root)
        return AppendixLpResult(n, sol.value, feasible, sum(r, Fraction(0)), rho**s, True)
    sq = math.sqrt(n)
    rho = 1 - 1 / sq
    r = rstar(n, sq)
    suffix = 0.0
    feasible = True
    for i in range(n, 0, -1):
        lhs = sq * r[i - 1] + suffix
        if lhs < rho ** (n - i) - 1e-12:
            feasible = False
        suffix += r[i - 1]
    # primal point: q_i = (1/sqrt n) * P(nothing selected before i) on the last s-1 indices
    q_total, value = 0.0, 0.0
    for i in range(n - s + 2, n + 1):
        q = (1 - q_total) / sq
        value += rho ** (n - i) * q
        q_total += q
    return AppendixLpResult(n, value, feasible, float(sum(r)), rho**s, False, value)


# --- Monte Carlo ---


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    stderr: float | None
    ci_low: float | None
    ci_high: float | None
    trials: int
    seed: int

    def within(self, exact, sigmas: float = 3.0) -> bool:
        if self.stderr is None:
            return False
        return abs(self.mean - float(exact)) <= sigmas * self.stderr + 1e-15


def _sample_answers(alg, r: Seq, rng: np.random.Generator, answer_count: int) -> Seq:
    if isinstance(alg, DeterministicAlgorithm):
        return alg.answers(r)
    if isinstance(alg, RealizationPlan):
        ap: Seq = ()
        for i in range(1, len(r) + 1):
            rp = tuple(r[:i])
            probs = [alg.answer_probability(rp, ap, a) for a in range(answer_count)]
            ap = ap + (int(rng.choice(answer_count, p=[float(p) for p in probs])),)
        return ap
    raise TypeError(f"cannot simulate {alg!r}")


def monte_carlo(
    alg,
    generator,
    game: Game | None,
    trials: int,
    seed: int,
    value_fn: Callable[[Seq, Seq], object] | None = None,
    n: int | None = None,
) -> MonteCarloResult:
    """Empirical mean of ``value_fn(r, ALG[r])`` with a 95% normal-approximation interval.

    ``value_fn`` defaults to the game's utility.  All randomness comes from a
    Philox generator seeded with ``seed``.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if value_fn is None:
        if game is None:
            raise DomainError("either a game or a value function is required")
        value_fn = game.f
    n = n if n is not None else (game.n if game is not None else None)
    answer_count = game.answer_count if game is not None else 2
    rng = make_rng(seed)
    vals = np.empty(trials)
    for t in range(trials):
        r = sample_with(generator, rng, n)
        vals[t] = float(to_fraction(value_fn(r, _sample_answers(alg, r, rng, answer_count))))
    mean = float(vals.mean())
    if trials < 2:
        return MonteCarloResult(mean, None, None, None, trials, seed)
    stderr = float(vals.std(ddof=1) / math.sqrt(trials))
    return MonteCarloResult(mean, stderr, mean - 1.96 * stderr, mean + 1.96 * stderr, trials, seed)


def two_point_instance(rng: np.random.Generator, n: int, m: int) -> Product:
    """Random independent marginals on ``0..m``, each supported on two values."""
    marginals = []
    for _ in range(n):
        lo, hi = sorted(int(v) for v in rng.choice(m + 1, size=2, replace=False))
        p = Fraction(int(rng.integers(1, 8)), 8)
        vec = [Fraction(0)] * (m + 1)
        vec[lo] += 1 - p
        vec[hi] += p
        marginals.append(tuple(vec))
    return Product(tuple(marginals))


def product_support(marginals: Product) -> Sequence[Seq]:
    return list(densify(marginals, (len(marginals.marginals), len(marginals.marginals[0]))))


def random_game(seed: int, n: int = 2, request_count: int = 2, answer_count: int = 2, levels: int = 4) -> Game:
    """Seeded game with utilities in ``{0, 1/levels, ..., 1}``."""
    rng = make_rng(seed)
    nr, na = request_count**n, answer_count**n
    values = rng.integers(0, levels + 1, size=(nr, na))
    table = tuple(tuple(Fraction(int(v), levels) for v in row) for row in values)
    return Game(n, request_count, answer_count, table, name=f"random(seed={seed})")
