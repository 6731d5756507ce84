from __future__ import annotations

import itertools
import math
from fractions import Fraction as F

import pytest

from expected import APPENDIX_PRIMAL, BRUSS_HARMONIC, ONE_OVER_E, SECRETARY_4_CUTOFF_1
from oracles import all_answer_tables, run
from ragame.cr_models import compute
from ragame.distributions import Delta, DistClass, Iid, Knowledge, ModelClass, RandomOrderDet, densify, expectation
from ragame.examples import (
    OddsInstance,
    SelectionInstance,
    appendix_lp,
    best_pick,
    bruss_algorithm,
    build_odds_game,
    build_selection_game,
    expected_max,
    monte_carlo,
    odds_chain_distribution,
    prediction_d,
    prediction_e,
    prophet_threshold,
    rstar,
    rstar_closed_form,
    secretary_rule,
    secretary_success_probability,
    selection_value,
    tail_odds,
    two_point_instance,
    win_probability,
)
from ragame.distributions import make_rng
from ragame.game import DomainError, Multiset
from ragame.strategies import DeterministicAlgorithm, best_response


def test_selection_utility():
    game = build_selection_game(SelectionInstance(m=1, n=2))
    assert game.f((0, 1), (0, 1)) == 1
    assert game.f((0, 1), (1, 1)) == 0
    assert game.f((0, 1), (0, 0)) == 0
    with pytest.raises(DomainError):
        SelectionInstance(m=0, n=2)


def test_odds_utility():
    game = build_odds_game(3)
    assert all(game.f((0, 0, 0), a) == 1 for a in itertools.product(range(2), repeat=3))
    assert game.f((1, 0, 1), (0, 0, 1)) == 1
    assert game.f((1, 0, 1), (1, 0, 1)) == 0
    assert all(game.opt_table[game.r_index(r)] == 1 for r in game.requests())


def test_odds_chain_distribution():
    d = odds_chain_distribution(2)
    assert dict(d) == {(1, 0): F(1, 2), (1, 1): F(1, 2)}
    assert sum(odds_chain_distribution(4).values()) == 1


def test_prediction_games():
    e = prediction_e(3)
    assert e.f((0, 0, 1), (1, 0, 0)) == 1
    assert e.f((0, 0, 1), (0, 0, 0)) == 0
    d = prediction_d(3)
    # requests are 0-based, so (1, 3, 2) is (0, 2, 1): last pair decreasing
    assert d.f((0, 2, 1), (1, 0, 0)) == 0
    assert d.f((0, 1, 2), (1, 0, 0)) == 1
    # a non-permutation is never a member
    assert d.f((0, 0, 2), (0, 1, 1)) == 1
    for game in (d, e):
        assert all(game.opt_table[game.r_index(r)] == 1 for r in game.requests())


def test_tail_odds_and_bruss_start():
    inst = OddsInstance.harmonic(4)
    # odds of p = 1/3 and 1/4 are 1/2 and 1/3
    assert tail_odds(inst, 1) == F(5, 6)
    assert tail_odds(inst, 0) == F(11, 6)
    assert tail_odds(OddsInstance((F(1, 2), F(1))), 0) == math.inf
    alg = bruss_algorithm(inst)
    assert alg.answers((1, 1, 0, 0)) == (0, 1, 0, 0)
    assert alg.answers((1, 0, 1, 0)) == (0, 0, 1, 0)


def test_bruss_waits_for_certain_success():
    inst = OddsInstance((F(1, 2), F(1)))
    alg = bruss_algorithm(inst)
    assert alg.answers((1, 1)) == (0, 1)


def exhaustive_best(inst):
    game = build_odds_game(inst.n)
    d = densify(inst.product(), game)
    return max(sum(p * game.f(r, run(t, r)) for r, p in d.items()) for t in all_answer_tables(game))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bruss_is_optimal(n):
    inst = OddsInstance.harmonic(n)
    value = win_probability(bruss_algorithm(inst), inst)
    assert value == BRUSS_HARMONIC[n]
    game = build_odds_game(n)
    assert best_response(game, densify(inst.product(), game))[1] == value


def test_bruss_exhaustive_n3():
    inst = OddsInstance.harmonic(3)
    assert exhaustive_best(inst) == F(1, 2) == win_probability(bruss_algorithm(inst), inst)


def test_win_probability_simple_rules():
    inst = OddsInstance((F(1, 2), F(1, 3), F(1, 4)))
    never = DeterministicAlgorithm.lazy(3, lambda rp, past: 0)
    assert win_probability(never, inst) == F(1, 2) * F(2, 3) * F(3, 4)
    assert win_probability(never, inst, include_all_zero=False) == 0
    first = DeterministicAlgorithm.lazy(3, lambda rp, past: int(len(rp) == 1 and rp[0] == 1))
    assert win_probability(first, inst) == F(1, 2) * F(2, 3) * F(3, 4) + F(1, 2) * F(2, 3) * F(3, 4)


def test_secretary_rule_behaviour():
    assert secretary_rule(3, 0).answers((2, 5, 1)) == (1, 0, 0)
    assert secretary_rule(3, 1).answers((1, 2, 3)) == (0, 1, 0)
    assert secretary_rule(3, 1).answers((3, 3, 2)) == (0, 0, 0)
    with pytest.raises(DomainError):
        secretary_rule(3, 3)


def test_secretary_probability_by_permutations():
    for n in (3, 4):
        for cutoff in range(n):
            alg = secretary_rule(n, cutoff)
            perms = list(itertools.permutations(range(1, n + 1)))
            hits = sum(best_pick(r, alg.answers(r)) for r in perms)
            assert secretary_success_probability(n, cutoff) == F(hits, len(perms))
    assert secretary_success_probability(4, 1) == SECRETARY_4_CUTOFF_1


def test_prophet_point_masses():
    marg = two_point_instance(make_rng(0), 2, 3)
    point = type(marg)(tuple(tuple(F(int(j == v)) for j in range(4)) for v in (1, 3)))
    alg = prophet_threshold(point)
    assert expected_max(point) == 3
    assert alg.answers((1, 3)) == (0, 1)


@pytest.mark.parametrize("seed", range(10))
def test_prophet_half_of_expected_max(seed):
    rng = make_rng(seed)
    n = 2 + seed % 2
    marg = two_point_instance(rng, n, 4)
    alg = prophet_threshold(marg)
    d = densify(marg, (n, 5))
    assert selection_value(alg, d, n) >= expected_max(marg) / 2
    assert expected_max(marg) == expectation(d, max)


def test_selection_known_rd_and_det_are_one():
    game = build_selection_game(SelectionInstance(m=2, n=2))
    for cls in (DistClass.RD, DistClass.DET):
        assert compute(game, ModelClass(cls, Knowledge.KNOWN)).value.value == 1


def test_secretary_family_within_known_rd_optimum():
    n = 3
    game = build_selection_game(SelectionInstance(m=n, n=n))
    d = densify(RandomOrderDet(Multiset((0,) + (1,) * n)), game)
    _, best = best_response(game, d)
    for cutoff in range(n):
        assert selection_value(secretary_rule(n, cutoff), d, n) <= best


@pytest.mark.parametrize("n", [4, 9, 16])
def test_appendix_exact(n):
    res = appendix_lp(n)
    assert res.rstar_feasible
    assert res.primal_value == APPENDIX_PRIMAL[n]
    # weak duality, and r* is in fact optimal
    assert res.primal_value == res.rstar_value == rstar_closed_form(n)
    root = math.isqrt(n)
    assert res.closed_form == (1 - F(1, root)) ** root


def test_appendix_rstar_formula():
    r = rstar(4, 2)
    assert r == [0, 0, 0, F(1, 2)]


def test_appendix_rejects_non_square():
    with pytest.raises(DomainError):
        appendix_lp(5)


def test_appendix_float_mode():
    res = appendix_lp(10_000, float_mode=True)
    assert res.rstar_feasible
    assert abs(res.rstar_value - 0.99**99) < 1e-9
    assert abs(res.primal_value - res.rstar_value) < 1e-9
    assert abs(res.rstar_value - ONE_OVER_E) < 2e-3


def test_monte_carlo_point_mass_has_zero_width():
    game = build_odds_game(2)
    alg = DeterministicAlgorithm.lazy(2, lambda rp, past: 0)
    mc = monte_carlo(alg, Delta((1, 0)), game, 50, seed=3)
    assert mc.mean == 0 and mc.stderr == 0 and mc.ci_low == mc.ci_high


def test_monte_carlo_reproducible_and_accurate():
    inst = OddsInstance.harmonic(3)
    alg = bruss_algorithm(inst)
    game = build_odds_game(3)
    a = monte_carlo(alg, inst.product(), game, 20_000, seed=7)
    b = monte_carlo(alg, inst.product(), game, 20_000, seed=7)
    assert a == b
    assert a.within(F(1, 2))


def test_monte_carlo_single_trial():
    game = build_odds_game(2)
    mc = monte_carlo(DeterministicAlgorithm.lazy(2, lambda rp, past: 0), Iid((F(1, 2), F(1, 2))), game, 1, seed=0)
    assert mc.stderr is None and not mc.within(F(1, 2))
    with pytest.raises(DomainError):
        monte_carlo(None, Delta((0, 0)), game, 0, seed=0)
