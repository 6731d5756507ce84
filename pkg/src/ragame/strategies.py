"""Online algorithms: deterministic rules, realization plans and best responses.

A randomized online algorithm is held in sequence form: ``x[(rp, ap)]`` is the
probability that the algorithm answers ``ap`` to the request prefix ``rp``
(both of length ``i``).  Flow conservation

    sum_a x[(rp, ap + (a,))] == x[(rp[:-1], ap)]

for every ``rp`` of length ``i >= 1`` and ``ap`` of length ``i - 1`` encodes
that the answer at round ``i`` may depend on ``r_1..r_i`` and on earlier
answers but not on future requests.  The root ``x[((), ())]`` is 1.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction

from .game import Game, Seq, SizeCapError, size_cap
from .lp import EQ, Constraint

PlanKey = tuple[Seq, Seq]
ROOT: PlanKey = ((), ())
DEFAULT_ENUM_CAP = 1_000_000


def request_prefixes(game: Game) -> Iterator[Seq]:
    """Nonempty request prefixes, shortest first."""
    for i in range(1, game.n + 1):
        yield from itertools.product(range(game.request_count), repeat=i)


@dataclass(frozen=True)
class DeterministicAlgorithm:
    """Answer for every nonempty request prefix."""

    decisions: Mapping[Seq, int]
    n: int

    def answers(self, r: Seq) -> Seq:
        return tuple(self.decisions[tuple(r[: i + 1])] for i in range(len(r)))

    def __call__(self, r: Seq) -> Seq:
        return self.answers(r)

    @classmethod
    def from_rule(cls, game: Game, rule: Callable[[Seq, Seq], int]) -> DeterministicAlgorithm:
        """Tabulate ``rule(request_prefix, own_previous_answers)`` over all prefixes."""
        decisions: dict[Seq, int] = {}
        for rp in request_prefixes(game):
            past = tuple(decisions[rp[:i]] for i in range(1, len(rp)))
            decisions[rp] = int(rule(rp, past))
        return cls(decisions, game.n)

    @classmethod
    def lazy(cls, n: int, rule: Callable[[Seq, Seq], int]) -> DeterministicAlgorithm:
        """Algorithm whose decisions are computed from ``rule`` on first use.

        Useful when the request alphabet is large or not fixed in advance.
        """
        return cls(_RuleDecisions(rule), n)


class _RuleDecisions:
    def __init__(self, rule: Callable[[Seq, Seq], int]):
        self.rule = rule
        self.cache: dict[Seq, int] = {}

    def __getitem__(self, rp: Seq) -> int:
        rp = tuple(rp)
        if rp not in self.cache:
            past = tuple(self[rp[:i]] for i in range(1, len(rp)))
            self.cache[rp] = int(self.rule(rp, past))
        return self.cache[rp]


class RealizationPlan(Mapping):
    """Sparse sequence-form plan; missing keys have probability zero."""

    __slots__ = ("_x", "n")

    def __init__(self, x: Mapping[PlanKey, Fraction], n: int):
        self._x = {k: Fraction(v) for k, v in x.items() if v}
        self._x[ROOT] = Fraction(1)
        self.n = n

    def __getitem__(self, key) -> Fraction:
        return self._x.get(key, Fraction(0))

    def __iter__(self):
        return iter(self._x)

    def __len__(self) -> int:
        return len(self._x)

    def __eq__(self, other):
        if isinstance(other, RealizationPlan):
            return self._x == other._x
        return NotImplemented

    __hash__ = None

    def full(self) -> Iterator[tuple[Seq, Seq, Fraction]]:
        """``(r, a, probability)`` for complete sequences with positive mass."""
        for (rp, ap), v in self._x.items():
            if len(rp) == self.n:
                yield rp, ap, v

    def mix(self, other: RealizationPlan, weight: Fraction) -> RealizationPlan:
        """``weight * self + (1 - weight) * other``."""
        keys = set(self._x) | set(other._x)
        return RealizationPlan({k: weight * self[k] + (1 - weight) * other[k] for k in keys}, self.n)

    def answer_probability(self, rp: Seq, ap: Seq, a: int) -> Fraction:
        """Behavioural probability of answering ``a`` after ``(rp, ap)``; 0 if unreachable."""
        parent = self[(rp[:-1], ap)]
        return self[(rp, ap + (a,))] / parent if parent else Fraction(0)


def flow_violations(plan: RealizationPlan, game: Game) -> list[str]:
    bad = []
    for (rp, ap), v in plan.items():
        if not 0 <= v <= 1:
            bad.append(f"x{rp, ap} = {v} outside [0, 1]")
    for rp in request_prefixes(game):
        for ap in itertools.product(range(game.answer_count), repeat=len(rp) - 1):
            total = sum(plan[(rp, ap + (a,))] for a in range(game.answer_count))
            parent = plan[(rp[:-1], ap)]
            if total != parent:
                bad.append(f"flow at {rp, ap}: {total} != {parent}")
    return bad


def is_valid_plan(plan: RealizationPlan, game: Game) -> bool:
    return not flow_violations(plan, game)


def plan_of_deterministic(alg: DeterministicAlgorithm, game: Game) -> RealizationPlan:
    x = {}
    for rp in request_prefixes(game):
        x[(rp, alg.answers(rp))] = Fraction(1)
    return RealizationPlan(x, game.n)


def alg_value(plan, d: Mapping[Seq, Fraction], game: Game) -> Fraction:
    """Exact ``E_{r~d}[ALG(r)]`` for a plan or a deterministic algorithm."""
    total = Fraction(0)
    if isinstance(plan, DeterministicAlgorithm):
        for r, p in d.items():
            total += p * game.f(r, plan.answers(r))
        return total
    for r, a, v in plan.full():
        p = d.get(r) if hasattr(d, "get") else d[r]
        if p:
            total += p * v * game.f(r, a)
    return total


def values_by_request(plan, game: Game) -> dict[Seq, Fraction]:
    """``ALG(r)`` for every request sequence."""
    if isinstance(plan, DeterministicAlgorithm):
        return {r: game.f(r, plan.answers(r)) for r in game.requests()}
    out = {r: Fraction(0) for r in game.requests()}
    for r, a, v in plan.full():
        out[r] += v * game.f(r, a)
    return out


def best_response(game: Game, d: Mapping[Seq, Fraction]) -> tuple[DeterministicAlgorithm, Fraction]:
    """Deterministic algorithm maximizing ``E_{r~d}[ALG(r)]`` and that maximum.

    Backward induction over ``(request prefix, answer prefix)`` states, with
    unnormalized values so no conditional probabilities are formed.  Prefixes
    of probability zero are not expanded and answer 0; ties go to the lowest
    answer index.
    """
    n, nr, na = game.n, game.request_count, game.answer_count
    prefix_mass: dict[Seq, Fraction] = {}
    for r, p in d.items():
        if p:
            for i in range(1, n + 1):
                prefix_mass[r[:i]] = prefix_mass.get(r[:i], 0) + p
    table, encode_r = game.table, game.r_index
    best: dict[PlanKey, int] = {}

    def value(rp: Seq, ap_idx: int, ap: Seq) -> Fraction:
        # ap_idx is ap encoded base |A|, used for the utility lookup at the leaves
        if len(rp) == n:
            return d[rp] * table[encode_r(rp)][ap_idx]
        total = Fraction(0)
        for x in range(nr):
            rp2 = rp + (x,)
            if rp2 not in prefix_mass:
                continue
            top, arg = None, 0
            for a in range(na):
                v = value(rp2, ap_idx * na + a, ap + (a,))
                if top is None or v > top:
                    top, arg = v, a
            best[(rp2, ap)] = arg
            total += top
        return total

    total = value((), 0, ())
    decisions: dict[Seq, int] = {}
    for rp in request_prefixes(game):
        past = tuple(decisions[rp[:i]] for i in range(1, len(rp)))
        decisions[rp] = best.get((rp, past), 0)
    return DeterministicAlgorithm(decisions, n), total


def deterministic_count(game: Game) -> int:
    prefixes = sum(game.request_count ** i for i in range(1, game.n + 1))
    return game.answer_count ** prefixes


def enumerate_deterministic(game: Game, cap: int | None = None) -> Iterator[DeterministicAlgorithm]:
    """Every deterministic algorithm exactly once (refuses above ``cap``)."""
    cap = size_cap(DEFAULT_ENUM_CAP) if cap is None else cap
    count = deterministic_count(game)
    if count > cap:
        raise SizeCapError("deterministic algorithms", count, cap)
    prefixes = list(request_prefixes(game))
    for choice in itertools.product(range(game.answer_count), repeat=len(prefixes)):
        yield DeterministicAlgorithm(dict(zip(prefixes, choice)), game.n)


class SequenceForm:
    """Variable layout and flow constraints of the realization-plan polytope."""

    def __init__(self, game: Game):
        self.game = game
        self.keys: list[PlanKey] = []
        for i in range(1, game.n + 1):
            for rp in itertools.product(range(game.request_count), repeat=i):
                for ap in itertools.product(range(game.answer_count), repeat=i):
                    self.keys.append((rp, ap))
        self.index = {k: j for j, k in enumerate(self.keys)}

    @property
    def size(self) -> int:
        return len(self.keys)

    @staticmethod
    def count(game: Game) -> int:
        k = game.request_count * game.answer_count
        return sum(k ** i for i in range(1, game.n + 1))

    def flow_constraints(self, offset: int = 0) -> list[Constraint]:
        game = self.game
        rows = []
        for rp in request_prefixes(game):
            for ap in itertools.product(range(game.answer_count), repeat=len(rp) - 1):
                coeffs = {offset + self.index[(rp, ap + (a,))]: Fraction(1) for a in range(game.answer_count)}
                if rp[:-1]:
                    coeffs[offset + self.index[(rp[:-1], ap)]] = Fraction(-1)
                    rows.append(Constraint(coeffs, EQ, Fraction(0)))
                else:
                    rows.append(Constraint(coeffs, EQ, Fraction(1)))
        return rows

    def value_coeffs(self, d: Mapping[Seq, Fraction], offset: int = 0) -> dict[int, Fraction]:
        """Coefficients of ``E_{r~d}[ALG(r)]`` as a linear form in the plan variables."""
        game = self.game
        coeffs: dict[int, Fraction] = {}
        for r, p in d.items():
            if not p:
                continue
            row = game.table[game.r_index(r)]
            for ai, a in enumerate(game.answers()):
                v = row[ai]
                if v:
                    j = offset + self.index[(r, a)]
                    coeffs[j] = coeffs.get(j, 0) + p * v
        return coeffs

    def plan(self, values, offset: int = 0) -> RealizationPlan:
        return RealizationPlan({k: values[offset + j] for j, k in enumerate(self.keys)}, self.game.n)


def mixture_plan(algs: list[DeterministicAlgorithm], weights: list[Fraction], game: Game) -> RealizationPlan:
    x: dict[PlanKey, Fraction] = {}
    for alg, w in zip(algs, weights):
        if w:
            for k in plan_of_deterministic(alg, game):
                if k != ROOT:
                    x[k] = x.get(k, 0) + w
    return RealizationPlan(x, game.n)

