"""Finite request-answer games, request/answer sequences and the offline optimum.

A game is the tuple ``(R, A, f, n)``.  Requests and answers are opaque indices
``0 .. |R|-1`` and ``0 .. |A|-1``; a sequence is a plain tuple of ints of length
``n``.  Utilities are exact :class:`fractions.Fraction` values stored in a dense
table, so every downstream quantity (expectations, LP data) stays rational.

Only the maximization convention is modelled: an algorithm is ``rho``-competitive
for ``D`` when ``E[OPT] <= rho * E[ALG]``.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

Seq = tuple[int, ...]

DEFAULT_TABLE_CAP = 2_000_000


class GameError(ValueError):
    """Base class for invalid game descriptions."""


class IncompleteTableError(GameError):
    pass


class DomainError(GameError):
    pass


class SizeCapError(GameError):
    """Raised when an object would exceed a configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


def size_cap(default: int) -> int:
    """Cap used for a size check; ``RAGAME_SIZE_CAP`` overrides every default."""
    env = os.environ.get("RAGAME_SIZE_CAP")
    if env:
        return int(env)
    return default


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(value, bool):
        raise TypeError("booleans are not utilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def all_sequences(alphabet: int, length: int) -> Iterator[Seq]:
    """All sequences over ``range(alphabet)`` in lexicographic order."""
    return itertools.product(range(alphabet), repeat=length)


def encode(seq: Sequence[int], alphabet: int) -> int:
    idx = 0
    for s in seq:
        idx = idx * alphabet + s
    return idx


@dataclass(frozen=True)
class Multiset:
    """Request counts; ``counts[j]`` is how often symbol ``j`` occurs."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise DomainError("multiset counts must be nonnegative")

    @property
    def size(self) -> int:
        return sum(self.counts)

    def representative(self) -> Seq:
        """The sorted sequence with these counts."""
        return tuple(j for j, c in enumerate(self.counts) for _ in range(c))


@dataclass(frozen=True, eq=False)
class Game:
    """A validated request-answer game with a dense utility table.

    ``table[encode(r)][encode(a)]`` holds ``f(r, a)``.  Instances are immutable;
    ``opt_table`` caches ``OPT(r)`` for every request sequence.
    """

    n: int
    request_count: int
    answer_count: int
    table: tuple[tuple[Fraction, ...], ...]
    name: str = "game"
    opt_table: tuple[Fraction, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.request_count < 1 or self.answer_count < 1:
            raise DomainError("n, |R| and |A| must be positive")
        nr = self.request_count ** self.n
        na = self.answer_count ** self.n
        if len(self.table) != nr or any(len(row) != na for row in self.table):
            raise IncompleteTableError(f"table must be {nr} x {na}")
        for row in self.table:
            for v in row:
                if v < 0:
                    raise DomainError(f"negative utility {v}")
        object.__setattr__(self, "opt_table", tuple(max(row) for row in self.table))

    def f(self, r: Sequence[int], a: Sequence[int]) -> Fraction:
        return self.table[encode(r, self.request_count)][encode(a, self.answer_count)]

    def requests(self) -> Iterator[Seq]:
        return all_sequences(self.request_count, self.n)

    def answers(self) -> Iterator[Seq]:
        return all_sequences(self.answer_count, self.n)

    def r_index(self, r: Sequence[int]) -> int:
        return encode(r, self.request_count)

    def a_index(self, a: Sequence[int]) -> int:
        return encode(a, self.answer_count)

    @property
    def max_utility(self) -> Fraction:
        return max(self.opt_table)

    def check_sequence(self, r: Sequence[int], alphabet: int | None = None) -> Seq:
        alphabet = self.request_count if alphabet is None else alphabet
        r = tuple(r)
        if len(r) != self.n or any(not 0 <= x < alphabet for x in r):
            raise DomainError(f"invalid sequence {r} for n={self.n}, alphabet={alphabet}")
        return r

    @classmethod
    def from_function(
        cls,
        n: int,
        request_count: int,
        answer_count: int,
        fn: Callable[[Seq, Seq], object],
        name: str = "game",
    ) -> Game:
        """Tabulate ``fn(r, a)`` over all sequence pairs."""
        check_table_size(n, request_count, answer_count)
        answers = list(all_sequences(answer_count, n))
        table = tuple(
            tuple(to_fraction(fn(r, a)) for a in answers)
            for r in all_sequences(request_count, n)
        )
        return cls(n, request_count, answer_count, table, name)


def check_table_size(n: int, request_count: int, answer_count: int) -> None:
    size = (request_count * answer_count) ** n
    cap = size_cap(DEFAULT_TABLE_CAP)
    if size > cap:
        raise SizeCapError("utility table", size, cap)


def build_game(
    n: int,
    request_count: int,
    answer_count: int,
    utility_entries: Mapping[tuple[Seq, Seq], object] | Iterable[tuple[Sequence[int], Sequence[int], object]],
    name: str = "game",
) -> Game:
    """Build a game from an explicit list of ``(r, a, value)`` entries.

    Every pair must be listed exactly once.  Raises :class:`IncompleteTableError`
    for missing or duplicate pairs and :class:`DomainError` for negative values
    or out-of-range indices.
    """
    if n < 1 or request_count < 1 or answer_count < 1:
        raise DomainError("n, |R| and |A| must be positive")
    check_table_size(n, request_count, answer_count)
    if isinstance(utility_entries, Mapping):
        items = [(r, a, v) for (r, a), v in utility_entries.items()]
    else:
        items = list(utility_entries)
    nr, na = request_count ** n, answer_count ** n
    rows: list[list[Fraction | None]] = [[None] * na for _ in range(nr)]
    for r, a, value in items:
        r, a = tuple(r), tuple(a)
        if len(r) != n or any(not 0 <= x < request_count for x in r):
            raise DomainError(f"bad request sequence {r}")
        if len(a) != n or any(not 0 <= x < answer_count for x in a):
            raise DomainError(f"bad answer sequence {a}")
        v = to_fraction(value)
        if v < 0:
            raise DomainError(f"negative utility {v} at r={r}, a={a}")
        i, j = encode(r, request_count), encode(a, answer_count)
        if rows[i][j] is not None:
            raise IncompleteTableError(f"duplicate entry r={r}, a={a}")
        rows[i][j] = v
    missing = sum(v is None for row in rows for v in row)
    if missing:
        raise IncompleteTableError(f"{missing} of {nr * na} utility entries missing")
    return Game(n, request_count, answer_count, tuple(tuple(row) for row in rows), name)


def opt(game: Game, r: Sequence[int]) -> Fraction:
    """Offline optimum ``max_a f(r, a)``."""
    return game.opt_table[game.r_index(game.check_sequence(r))]


def permute(r: Sequence[int], sigma: Sequence[int]) -> Seq:
    """Return ``(r[sigma[0]], ..., r[sigma[n-1]])`` for a 0-based permutation."""
    if sorted(sigma) != list(range(len(r))):
        raise DomainError(f"{tuple(sigma)} is not a permutation of range({len(r)})")
    return tuple(r[s] for s in sigma)


def multiset_of(r: Sequence[int], alphabet: int | None = None) -> Multiset:
    if alphabet is None:
        alphabet = max(r, default=-1) + 1
    counts = [0] * alphabet
    for x in r:
        counts[x] += 1
    return Multiset(tuple(counts))


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Weak compositions of ``total`` into ``parts`` parts, lexicographically descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first, *rest)


def all_multisets(alphabet: int, n: int) -> list[Multiset]:
    return [Multiset(c) for c in compositions(n, alphabet)]
