from __future__ import annotations

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import all_answer_tables, brute_best_value, mixture_cr_float, run
from ragame.cr_models import cr_vertex_lp
from ragame.distributions import Delta, DistClass, densify, hull_vertices
from ragame.examples import build_odds_game, odds_chain_distribution, random_game
from ragame.game import SizeCapError, build_game
from ragame.strategies import (
    DeterministicAlgorithm,
    RealizationPlan,
    SequenceForm,
    alg_value,
    best_response,
    deterministic_count,
    enumerate_deterministic,
    flow_violations,
    is_valid_plan,
    mixture_plan,
    plan_of_deterministic,
    values_by_request,
)


def tiny_game(n=1, nr=2, na=2):
    entries = [
        (r, a, int(sum(a) == 1))
        for r in itertools.product(range(nr), repeat=n)
        for a in itertools.product(range(na), repeat=n)
    ]
    return build_game(n, nr, na, entries)


def test_enumeration_counts():
    assert len(list(enumerate_deterministic(tiny_game(1)))) == 4
    assert deterministic_count(tiny_game(2)) == 64
    algs = list(enumerate_deterministic(tiny_game(2)))
    assert len(algs) == 64
    assert len({tuple(sorted(a.decisions.items())) for a in algs}) == 64


def test_enumeration_cap_refused():
    with pytest.raises(SizeCapError):
        next(enumerate_deterministic(tiny_game(2), cap=63))


def test_enumeration_cap_env_override(monkeypatch):
    monkeypatch.setenv("RAGAME_SIZE_CAP", "10")
    with pytest.raises(SizeCapError):
        next(enumerate_deterministic(tiny_game(2)))


def test_online_answers_depend_on_prefix_only():
    game = tiny_game(2)
    for alg in enumerate_deterministic(game):
        for r in game.requests():
            for s in game.requests():
                if r[0] == s[0]:
                    assert alg.answers(r)[0] == alg.answers(s)[0]


def test_deterministic_plan_is_valid_and_matches_direct_value():
    game = random_game(3, n=2)
    d = densify(first_point_mass(game), game)
    for alg in itertools.islice(enumerate_deterministic(game), 0, 64, 7):
        plan = plan_of_deterministic(alg, game)
        assert is_valid_plan(plan, game)
        assert alg_value(plan, d, game) == alg_value(alg, d, game)


def first_point_mass(game):
    return Delta(next(game.requests()))


def test_flow_violation_detected():
    game = tiny_game(2)
    plan = plan_of_deterministic(next(enumerate_deterministic(game)), game)
    bad = dict(plan)
    key = next(k for k in bad if len(k[0]) == 2)
    bad[key] = F(1, 2)
    broken = RealizationPlan(bad, game.n)
    assert flow_violations(broken, game)
    assert not is_valid_plan(broken, game)


@given(st.integers(0, 10**6), st.lists(st.integers(1, 5), min_size=2, max_size=2))
def test_mixture_plan_is_linear(seed, raw):
    game = random_game(seed, n=2)
    algs = list(enumerate_deterministic(game))
    picked = [algs[seed % 64], algs[(seed // 64) % 64]]
    weights = [F(w, sum(raw)) for w in raw]
    plan = mixture_plan(picked, weights, game)
    assert is_valid_plan(plan, game)
    vals = values_by_request(plan, game)
    for r in game.requests():
        assert vals[r] == sum(w * game.f(r, a.answers(r)) for w, a in zip(weights, picked))


def random_distribution(game, seed):
    import numpy as np

    rng = np.random.default_rng(seed)
    reqs = list(game.requests())
    raw = rng.integers(0, 4, size=len(reqs))
    if raw.sum() == 0:
        raw[0] = 1
    return {r: F(int(x), int(raw.sum())) for r, x in zip(reqs, raw) if x}


@given(st.integers(0, 10**6))
def test_best_response_matches_brute_force(seed):
    game = random_game(seed, n=2)
    d = random_distribution(game, seed)
    alg, value = best_response(game, d)
    assert value == brute_best_value(game, d)
    assert alg_value(alg, d, game) == value


def test_best_response_all_tables_small_game():
    game = tiny_game(2, 2, 2)
    d = {(0, 0): F(1, 2), (1, 1): F(1, 2)}
    _, value = best_response(game, d)
    assert value == max(sum(p * game.f(r, run(t, r)) for r, p in d.items()) for t in all_answer_tables(game))


def test_odds_chain_best_response():
    game = build_odds_game(3)
    alg, value = best_response(game, odds_chain_distribution(3))
    assert value == F(1, 3)


def test_sequence_form_size():
    game = tiny_game(2, 2, 3)
    sf = SequenceForm(game)
    assert sf.size == SequenceForm.count(game) == 6 + 36


@pytest.mark.parametrize("seed", range(6))
def test_plans_equal_mixtures_of_deterministic_algorithms(seed):
    # the CR over sequence-form plans equals the CR over explicit mixtures
    game = random_game(seed, n=2)
    vertices = list(hull_vertices(DistClass.DEP, game))
    res = cr_vertex_lp(game, vertices)
    ref = mixture_cr_float(game, [densify(v, game) for v in vertices])
    lo, hi = res.interval()
    if ref == float("inf"):
        assert hi == float("inf")
    else:
        assert abs(float(lo) - ref) < 1e-7


def test_lazy_algorithm_matches_tabulated():
    game = tiny_game(3)
    rule = lambda rp, past: int(rp[-1] == 1 and 1 not in past)  # noqa: E731
    eager = DeterministicAlgorithm.from_rule(game, rule)
    lazy = DeterministicAlgorithm.lazy(3, rule)
    for r in game.requests():
        assert eager.answers(r) == lazy.answers(r)
