from __future__ import annotations

import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragame.distributions import (
    NOT_POLYHEDRAL,
    Delta,
    DenseDistribution,
    DistClass,
    Iid,
    Mixture,
    ModelClass,
    Product,
    RandomOrderDet,
    RandomOrderInd,
    densify,
    expectation,
    hull_vertices,
    iid_as_psi_mixture,
    make_rng,
    psi,
    random_order_ind_as_psi_mixture,
    sample,
    sample_with,
)
from ragame.examples import build_odds_game, odds_chain_distribution
from ragame.game import DomainError, Multiset, SizeCapError, multiset_of, opt, permute


def simplex(k, denominator=12):
    """Rational simplex vectors of length ``k``."""
    return st.lists(st.integers(0, denominator), min_size=k, max_size=k).filter(sum).map(
        lambda xs: tuple(F(x, sum(xs)) for x in xs)
    )


def generators(n, k):
    leaf = st.one_of(
        st.tuples(*[st.integers(0, k - 1)] * n).map(Delta),
        simplex(k).map(Iid),
        st.lists(simplex(k), min_size=n, max_size=n).map(lambda ms: Product(tuple(ms))),
        st.lists(st.integers(0, k - 1), min_size=n, max_size=n).map(lambda r: psi(r, k)),
        st.lists(simplex(k), min_size=n, max_size=n).map(lambda ms: RandomOrderInd(tuple(ms))),
    )
    return st.one_of(
        leaf,
        st.lists(leaf, min_size=1, max_size=3).flatmap(
            lambda comps: simplex(len(comps)).map(lambda w: Mixture(w, tuple(comps)))
        ),
    )


def test_delta_densify():
    d = densify(Delta((1, 0)), (2, 2))
    assert d[(1, 0)] == 1 and d[(0, 0)] == 0 and len(d) == 1


def test_random_order_with_repeats():
    d = densify(RandomOrderDet(Multiset((2, 1))), (3, 2))
    assert dict(d) == {(0, 0, 1): F(1, 3), (0, 1, 0): F(1, 3), (1, 0, 0): F(1, 3)}


def test_psi_examples():
    assert dict(densify(psi((1, 2), 3), (2, 3))) == {(1, 2): F(1, 2), (2, 1): F(1, 2)}
    assert dict(densify(psi((1, 1), 3), (2, 3))) == {(1, 1): F(1)}


@given(simplex(3), st.integers(1, 4))
def test_random_order_ind_with_equal_marginals_is_iid(m, n):
    assert densify(RandomOrderInd((m,) * n), (n, 3)) == densify(Iid(m), (n, 3))


@given(st.integers(1, 4).flatmap(lambda n: generators(n, 2).map(lambda g: (n, g))))
def test_densify_sums_to_one(ng):
    n, g = ng
    d = densify(g, (n, 2))
    assert sum(d.values()) == 1
    assert all(p > 0 for p in d.values())
    DenseDistribution(dict(d), n, 2)  # validates


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        densify(Iid((F(1, 2), F(1, 2))), (2, 3))
    with pytest.raises(DomainError):
        densify(Delta((0, 1, 0)), (2, 2))
    with pytest.raises(DomainError):
        densify(Product(((F(1),),)), (2, 1))


def test_invalid_simplex_vectors():
    with pytest.raises(DomainError):
        Iid((F(1, 2), F(1, 3)))
    with pytest.raises(DomainError):
        Iid((F(3, 2), F(-1, 2)))
    with pytest.raises(DomainError):
        DenseDistribution({(0,): F(1, 2)}, 1, 2)


def test_random_order_cap():
    with pytest.raises(SizeCapError):
        densify(RandomOrderDet(Multiset((7, 0))), (7, 2))


def test_expectation_examples():
    g = build_odds_game(3)
    d = densify(Delta((1, 0, 1)), g)
    assert expectation(d, lambda r: opt(g, r)) == opt(g, (1, 0, 1))
    assert expectation(odds_chain_distribution(3), lambda r: opt(g, r)) == 1
    assert expectation(densify(Iid((F(1, 3), F(2, 3))), (2, 2)), lambda r: F(5, 7)) == F(5, 7)


def test_hull_vertices_examples():
    assert len(hull_vertices(ModelClass.of("det", "unknown"), (2, 2))) == 4
    rd = hull_vertices(ModelClass.of("rd", "unknown"), (3, 2))
    assert sorted(v.multiset.counts for v in rd) == [(0, 3), (1, 2), (2, 1), (3, 0)]
    assert hull_vertices(DistClass.RI, (3, 2)) == rd
    assert hull_vertices(DistClass.IID, (3, 2)) is NOT_POLYHEDRAL


def test_psi_cap(monkeypatch):
    monkeypatch.setenv("RAGAME_SIZE_CAP", "3")
    with pytest.raises(SizeCapError):
        hull_vertices(DistClass.RD, (3, 2))


def test_iid_as_psi_mixture_uniform():
    mix = iid_as_psi_mixture(Iid((F(1, 2), F(1, 2))), (2, 2))
    weights = {c.multiset.counts: w for w, c in zip(mix.weights, mix.components)}
    assert weights == {(2, 0): F(1, 4), (1, 1): F(1, 2), (0, 2): F(1, 4)}
    point = iid_as_psi_mixture(Iid((F(0), F(1))), (2, 2))
    assert len(point.components) == 1


@given(simplex(3), st.integers(1, 4))
def test_iid_is_psi_mixture(m, n):
    g = Iid(m)
    assert densify(iid_as_psi_mixture(g, (n, 3)), (n, 3)) == densify(g, (n, 3))


@given(st.integers(1, 3).flatmap(lambda n: st.lists(simplex(2), min_size=n, max_size=n)))
def test_random_order_ind_is_psi_mixture(ms):
    n = len(ms)
    g = RandomOrderInd(tuple(ms))
    assert densify(random_order_ind_as_psi_mixture(g, (n, 2)), (n, 2)) == densify(g, (n, 2))


@given(st.integers(1, 4).flatmap(lambda n: generators(n, 2).map(lambda g: (n, g))), st.randoms())
def test_symmetric_generators_are_permutation_invariant(ng, rnd):
    n, g = ng
    if not isinstance(g, (Iid, RandomOrderDet, RandomOrderInd)):
        return
    d = densify(g, (n, 2))
    sigma = list(range(n))
    rnd.shuffle(sigma)
    assert all(d[permute(r, sigma)] == p for r, p in d.items())


@given(st.lists(st.integers(0, 2), min_size=1, max_size=5), st.randoms())
def test_psi_orbit_canonical(r, rnd):
    sigma = list(range(len(r)))
    rnd.shuffle(sigma)
    assert densify(psi(r, 3), (len(r), 3)) == densify(psi(permute(r, sigma), 3), (len(r), 3))


def test_mixture_of_extremes_is_not_iid():
    # p^2 = 1/2 has no rational solution, and no real one matches the (0,1) mass either
    target = densify(Mixture((F(1, 2), F(1, 2)), (Delta((0, 0)), Delta((1, 1)))), (2, 2))
    assert target[(0, 1)] == 0
    assert all(F(a, 1000) ** 2 != F(1, 2) for a in range(1001))
    best = min(
        max(abs(p * p - 0.5), abs(p * (1 - p)), abs((1 - p) ** 2 - 0.5)) for p in np.linspace(0, 1, 100001)
    )
    assert best > 0.1


def test_sampling_delta_and_reproducibility():
    assert sample(Delta((1, 0, 1)), 5) == (1, 0, 1)
    g = Iid((F(1, 3), F(2, 3)))
    assert [sample(g, s, 4) for s in range(20)] == [sample(g, s, 4) for s in range(20)]


def test_sampling_random_order_keeps_multiset():
    g = RandomOrderDet(Multiset((2, 1, 2)))
    rng = make_rng(3)
    for _ in range(200):
        assert multiset_of(sample_with(g, rng), 3) == g.multiset


def test_sampling_iid_uniform_marginal():
    rng = make_rng(11)
    g = Iid((F(1, 2), F(1, 2)))
    trials = 100_000
    ones = sum(sample_with(g, rng, 1)[0] for _ in range(trials))
    sigma = math.sqrt(trials / 4)
    assert abs(ones - trials / 2) <= 3 * sigma


def test_sampling_matches_mass_function():
    g = Mixture((F(1, 4), F(3, 4)), (psi((0, 1, 1), 2), Iid((F(1, 5), F(4, 5)))))
    d = densify(g, (3, 2))
    rng = make_rng(2)
    trials = 40_000
    counts = {}
    for _ in range(trials):
        r = sample_with(g, rng, 3)
        counts[r] = counts.get(r, 0) + 1
    assert set(counts) <= set(d)
    for r, p in d.items():
        p = float(p)
        assert abs(counts.get(r, 0) / trials - p) <= 4 * math.sqrt(p * (1 - p) / trials) + 1e-9


def test_model_labels():
    labels = {ModelClass.of(c, k).label for c in ("dep", "iid") for k in ("known", "unknown")}
    assert labels == {"kCR_dep", "CR_dep", "kCR_iid", "CR_iid"}
    with pytest.raises(ValueError):
        ModelClass.of("foo", "known")
    assert len(list(itertools.product(DistClass, repeat=1))) == 6
