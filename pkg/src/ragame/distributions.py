"""Input distributions over request sequences.

Distributions are described by small generator values (point mass, i.i.d.,
product, random order of a multiset, random order of independent marginals,
finite mixtures) and turned into exact mass tables with :func:`densify`.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import (
    DomainError,
    Game,
    Multiset,
    Seq,
    SizeCapError,
    all_multisets,
    multiset_of,
    size_cap,
    to_fraction,
)

MAX_RANDOM_ORDER_N = 6
DEFAULT_PSI_CAP = 10_000


class DistClass(str, enum.Enum):
    DEP = "dep"
    DET = "det"
    IND = "ind"
    IID = "iid"
    RD = "rd"
    RI = "ri"


class Knowledge(str, enum.Enum):
    KNOWN = "known"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ModelClass:
    cls: DistClass
    knowledge: Knowledge

    @classmethod
    def of(cls, name: str, knowledge: str) -> ModelClass:
        return cls(DistClass(name), Knowledge(knowledge))

    @property
    def label(self) -> str:
        prefix = "k" if self.knowledge is Knowledge.KNOWN else ""
        return f"{prefix}CR_{self.cls.value}"

    def __str__(self) -> str:
        return self.label


ALL_MODELS = tuple(ModelClass(c, k) for k in Knowledge for c in DistClass)


def simplex_vector(values: Iterable) -> tuple[Fraction, ...]:
    vec = tuple(to_fraction(v) for v in values)
    if any(v < 0 for v in vec) or sum(vec) != 1:
        raise DomainError(f"not a probability vector: {[str(v) for v in vec]}")
    return vec


@dataclass(frozen=True)
class Delta:
    r: Seq


@dataclass(frozen=True)
class Iid:
    marginal: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "marginal", simplex_vector(self.marginal))


@dataclass(frozen=True)
class Product:
    marginals: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(simplex_vector(m) for m in self.marginals))


@dataclass(frozen=True)
class RandomOrderDet:
    """Uniformly random ordering of a fixed multiset of requests."""

    multiset: Multiset


@dataclass(frozen=True)
class RandomOrderInd:
    """Independent marginals assigned to the slots by a uniform permutation."""

    marginals: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(simplex_vector(m) for m in self.marginals))


@dataclass(frozen=True)
class Mixture:
    weights: tuple[Fraction, ...]
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", simplex_vector(self.weights))
        if len(self.weights) != len(self.components):
            raise DomainError("mixture weights and components differ in length")


Generator = Delta | Iid | Product | RandomOrderDet | RandomOrderInd | Mixture


class NotPolyhedral:
    """Marker: the class has no finite vertex description."""

    def __repr__(self) -> str:
        return "NOT_POLYHEDRAL"


NOT_POLYHEDRAL = NotPolyhedral()


class DenseDistribution(Mapping):
    """Exact mass function on ``R^n``; sequences not stored have mass zero."""

    __slots__ = ("_mass", "n", "request_count")

    def __init__(self, mass: Mapping[Seq, Fraction], n: int, request_count: int, check: bool = True):
        self._mass = {tuple(r): Fraction(p) for r, p in mass.items() if p != 0}
        self.n = n
        self.request_count = request_count
        if check:
            for r, p in self._mass.items():
                if p < 0:
                    raise DomainError(f"negative mass at {r}")
                if len(r) != n or any(not 0 <= x < request_count for x in r):
                    raise DomainError(f"sequence {r} outside R^n")
            total = sum(self._mass.values())
            if total != 1:
                raise DomainError(f"masses sum to {total}, not 1")

    def __getitem__(self, r) -> Fraction:
        return self._mass.get(tuple(r), Fraction(0))

    def __iter__(self) -> Iterator[Seq]:
        return iter(self._mass)

    def __len__(self) -> int:
        return len(self._mass)

    def __contains__(self, r) -> bool:
        return tuple(r) in self._mass

    def __eq__(self, other) -> bool:
        if isinstance(other, DenseDistribution):
            return self._mass == other._mass
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._mass.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{r}: {p}" for r, p in sorted(self._mass.items()))
        return f"DenseDistribution({{{body}}})"

    def support(self) -> list[Seq]:
        return sorted(self._mass)


def _dims(game) -> tuple[int, int]:
    if isinstance(game, Game):
        return game.n, game.request_count
    n, request_count = game
    return n, request_count


def _product_mass(marginals: Sequence[Sequence[Fraction]]) -> dict[Seq, Fraction]:
    mass: dict[Seq, Fraction] = {(): Fraction(1)}
    for marginal in marginals:
        nxt = {}
        for prefix, p in mass.items():
            for x, q in enumerate(marginal):
                if q:
                    nxt[prefix + (x,)] = p * q
        mass = nxt
    return mass


def _check_marginals(marginals, n: int, request_count: int) -> None:
    if len(marginals) != n:
        raise DomainError(f"expected {n} marginals, got {len(marginals)}")
    for m in marginals:
        if len(m) != request_count:
            raise DomainError(f"marginal of length {len(m)} for |R|={request_count}")


def distinct_permutations(r: Seq) -> list[Seq]:
    return sorted(set(itertools.permutations(r)))


def multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def _mass(g, n: int, request_count: int) -> dict[Seq, Fraction]:
    if isinstance(g, Delta):
        r = tuple(g.r)
        if len(r) != n or any(not 0 <= x < request_count for x in r):
            raise DomainError(f"point mass at {r} outside R^n")
        return {r: Fraction(1)}
    if isinstance(g, Iid):
        _check_marginals([g.marginal] * n, n, request_count)
        return _product_mass([g.marginal] * n)
    if isinstance(g, Product):
        _check_marginals(g.marginals, n, request_count)
        return _product_mass(g.marginals)
    if isinstance(g, RandomOrderDet):
        counts = g.multiset.counts
        if len(counts) != request_count or sum(counts) != n:
            raise DomainError(f"multiset {counts} does not match n={n}, |R|={request_count}")
        if n > MAX_RANDOM_ORDER_N:
            raise SizeCapError("random-order densification n", n, MAX_RANDOM_ORDER_N)
        w = Fraction(1, multinomial(counts))
        return {r: w for r in distinct_permutations(g.multiset.representative())}
    if isinstance(g, RandomOrderInd):
        _check_marginals(g.marginals, n, request_count)
        if n > MAX_RANDOM_ORDER_N:
            raise SizeCapError("random-order densification n", n, MAX_RANDOM_ORDER_N)
        acc: dict[Seq, Fraction] = {}
        for sigma in itertools.permutations(range(n)):
            for r, p in _product_mass([g.marginals[s] for s in sigma]).items():
                acc[r] = acc.get(r, 0) + p
        k = math.factorial(n)
        return {r: p / k for r, p in acc.items()}
    if isinstance(g, Mixture):
        acc = {}
        for w, comp in zip(g.weights, g.components):
            if w == 0:
                continue
            for r, p in _mass(comp, n, request_count).items():
                acc[r] = acc.get(r, 0) + w * p
        return acc
    raise TypeError(f"unknown generator {g!r}")


def densify(g, game) -> DenseDistribution:
    """Exact mass table of a generator; ``game`` may be a Game or ``(n, |R|)``."""
    n, request_count = _dims(game)
    return DenseDistribution(_mass(g, n, request_count), n, request_count, check=False)


def psi(r: Sequence[int], request_count: int | None = None) -> RandomOrderDet:
    return RandomOrderDet(multiset_of(r, request_count))


def expectation(d: Mapping[Seq, Fraction], value_fn: Callable[[Seq], object]) -> Fraction:
    return sum((p * to_fraction(value_fn(r)) for r, p in d.items()), Fraction(0))


def hull_vertices(model: ModelClass | DistClass, game):
    """Finite generator family whose convex hull is the class's hull.

    Point masses for dep/det/ind, one random-order generator per multiset for
    rd/ri, and :data:`NOT_POLYHEDRAL` for i.i.d.
    """
    cls = model.cls if isinstance(model, ModelClass) else DistClass(model)
    n, request_count = _dims(game)
    if cls in (DistClass.DEP, DistClass.DET, DistClass.IND):
        return [Delta(r) for r in itertools.product(range(request_count), repeat=n)]
    if cls in (DistClass.RD, DistClass.RI):
        count = math.comb(n + request_count - 1, request_count - 1)
        cap = size_cap(DEFAULT_PSI_CAP)
        if count > cap:
            raise SizeCapError("multiset vertices", count, cap)
        return [RandomOrderDet(m) for m in all_multisets(request_count, n)]
    return NOT_POLYHEDRAL


def _psi_mixture(weights: Mapping[tuple[int, ...], Fraction]) -> Mixture:
    items = sorted(((c, w) for c, w in weights.items() if w), reverse=True)
    return Mixture(tuple(w for _, w in items), tuple(RandomOrderDet(Multiset(c)) for c, _ in items))


def iid_as_psi_mixture(g: Iid, game) -> Mixture:
    """Write an i.i.d. generator as a mixture of random-order generators.

    The weight of multiset ``c`` is ``multinomial(c) * prod_j p_j^{c_j}``.
    """
    n, request_count = _dims(game)
    if len(g.marginal) != request_count:
        raise DomainError("marginal length does not match |R|")
    weights = {}
    for m in all_multisets(request_count, n):
        w = Fraction(multinomial(m.counts))
        for p, c in zip(g.marginal, m.counts):
            w *= p ** c
        weights[m.counts] = w
    return _psi_mixture(weights)


def random_order_ind_as_psi_mixture(g: RandomOrderInd, game) -> Mixture:
    """Write a random-order-independent generator as a mixture of random-order generators.

    Each sequence ``r'`` drawn from the product of the marginals contributes
    its probability to the generator of its multiset.
    """
    n, request_count = _dims(game)
    _check_marginals(g.marginals, n, request_count)
    weights: dict[tuple[int, ...], Fraction] = {}
    for r, p in _product_mass(g.marginals).items():
        c = multiset_of(r, request_count).counts
        weights[c] = weights.get(c, 0) + p
    return _psi_mixture(weights)


def _draw(rng: np.random.Generator, probs: Sequence[Fraction]) -> int:
    denom = math.lcm(*(p.denominator for p in probs))
    if denom < 2**62:
        u = int(rng.integers(denom))
        acc = 0
        for i, p in enumerate(probs):
            acc += p.numerator * (denom // p.denominator)
            if u < acc:
                return i
        raise AssertionError("probabilities do not sum to one")
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += float(p)
        if u < acc:
            return i
    return max(i for i, p in enumerate(probs) if p)


def sample_with(g, rng: np.random.Generator, n: int | None = None) -> Seq:
    """Draw one request sequence from ``g`` using the caller's generator."""
    if isinstance(g, Delta):
        return tuple(g.r)
    if isinstance(g, Iid):
        if n is None:
            raise DomainError("sampling an i.i.d. generator needs n")
        return tuple(_draw(rng, g.marginal) for _ in range(n))
    if isinstance(g, Product):
        return tuple(_draw(rng, m) for m in g.marginals)
    if isinstance(g, RandomOrderDet):
        rep = list(g.multiset.representative())
        return tuple(rep[i] for i in rng.permutation(len(rep)))
    if isinstance(g, RandomOrderInd):
        sigma = rng.permutation(len(g.marginals))
        return tuple(_draw(rng, g.marginals[s]) for s in sigma)
    if isinstance(g, Mixture):
        k = _draw(rng, g.weights)
        return sample_with(g.components[k], rng, n)
    raise TypeError(f"unknown generator {g!r}")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator, reproducible across platforms."""
    return np.random.Generator(np.random.Philox(seed))


def sample(g, rng_seed: int, n: int | None = None) -> Seq:
    return sample_with(g, make_rng(rng_seed), n)
