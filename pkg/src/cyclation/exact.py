"""Exact counting for random cyclations and random permutations.

Everything here is integer or :class:`fractions.Fraction` arithmetic. Counts
are plain Python ints, which are arbitrary precision, so nothing overflows
and nothing is rounded.

Cycle types are stored as multiplicity vectors ``(i_1, i_2, ...)`` where
``i_l`` is the number of cycles of length ``l``; the weight of a type is
``sum(l * i_l)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple

DEFAULT_PARTITION_CAP = 60


class ResourceCapError(RuntimeError):
    """Raised when a request exceeds a configured enumeration cap."""


@dataclass(frozen=True)
class CycleType:
    """Multiplicities ``(i_1, ..., i_n)`` of cycles by length.

    Trailing zeros are stripped on construction, so ``CycleType((1, 1, 0))``
    and ``CycleType((1, 1))`` compare (and hash) equal.
    """

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative multiplicity in cycle type {counts}")
        while counts and counts[-1] == 0:
            counts = counts[:-1]
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_lengths(cls, lengths) -> "CycleType":
        lengths = list(lengths)
        if any(length < 1 for length in lengths):
            raise ValueError("cycle lengths must be positive")
        counts = [0] * (max(lengths, default=0))
        for length in lengths:
            counts[length - 1] += 1
        return cls(tuple(counts))

    @property
    def weight(self) -> int:
        return sum(l * c for l, c in enumerate(self.counts, start=1))

    @property
    def parts(self) -> int:
        return sum(self.counts)

    @property
    def longest(self) -> int:
        return len(self.counts)

    @property
    def shortest(self) -> int:
        for l, c in enumerate(self.counts, start=1):
            if c:
                return l
        return 0

    def lengths(self) -> list[int]:
        """Cycle lengths in decreasing order."""
        out = []
        for l in range(len(self.counts), 0, -1):
            out.extend([l] * self.counts[l - 1])
        return out

    def padded(self, n: int) -> tuple[int, ...]:
        return self.counts + (0,) * (n - len(self.counts))

    def __str__(self):
        return "(" + ",".join(map(str, self.counts)) + ")"


def _as_type(t, n: int | None) -> CycleType:
    if not isinstance(t, CycleType):
        t = CycleType(tuple(t))
    if n is not None and t.weight != n:
        raise ValueError(f"cycle type {t} has weight {t.weight}, expected {n}")
    return t


@lru_cache(maxsize=None)
def _stirling_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _stirling_row(n - 1)
    # [n, k] = (n-1) [n-1, k] + [n-1, k-1]
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        row[k] = prev[k - 1] + (n - 1) * (prev[k] if k < n else 0)
    return tuple(row)


def stirling_row(n: int) -> tuple[int, ...]:
    """Row ``([n, 0], ..., [n, n])`` of unsigned Stirling numbers of the first kind."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    # fill the cache bottom-up so deep rows never recurse far
    for m in range(n + 1):
        _stirling_row(m)
    return _stirling_row(n)


def stirling_first(n: int, k: int) -> int:
    """Number of permutations of ``n`` elements with exactly ``k`` cycles."""
    if n < 0 or k < 0 or k > n:
        return 0
    return stirling_row(n)[k]


def cyclation_count(n: int, k: int) -> int:
    """Number of n-cyclations with exactly ``k`` cycles, ``2**(n-k) * [n, k]``."""
    if n < 0 or k < 0 or k > n:
        return 0
    return stirling_first(n, k) << (n - k)


def rising_even_product(n: int) -> tuple[int, ...]:
    """Coefficients of ``eta (eta + 2) (eta + 4) ... (eta + 2n - 2)``.

    Expanded by repeated polynomial multiplication; this is an independent
    route to the cyclation counts and shares no code with the Stirling
    recurrence.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    coeffs = [1]
    for j in range(n):
        shift = 2 * j
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] += shift * c
        coeffs = nxt
    return tuple(coeffs)


def cyclation_count_by_product(n: int, k: int) -> int:
    if n < 0 or k < 0 or k > n:
        return 0
    return rising_even_product(n)[k]


def odd_double_factorial(n: int) -> int:
    """``(2n-1)!! = (2n-1)(2n-3)...3*1``, with ``(-1)!! = 1`` for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = 1
    for m in range(3, 2 * n, 2):
        out *= m
    return out


def perm_class_size(t, n: int | None = None) -> int:
    """Number of n-permutations with cycle type ``t``: ``n! / prod(l**i_l * i_l!)``."""
    t = _as_type(t, n)
    denom = 1
    for l, c in enumerate(t.counts, start=1):
        denom *= l**c * math.factorial(c)
    return math.factorial(t.weight) // denom


def cyc_class_size(t, n: int | None = None) -> int:
    """Number of n-cyclations with cycle type ``t``: ``n! 2**n / prod((2l)**i_l * i_l!)``."""
    t = _as_type(t, n)
    w = t.weight
    denom = 1
    for l, c in enumerate(t.counts, start=1):
        denom *= (2 * l) ** c * math.factorial(c)
    return (math.factorial(w) << w) // denom


def enumerate_cycle_types(n: int, cap: int = DEFAULT_PARTITION_CAP) -> Iterator[CycleType]:
    """Yield every cycle type of weight ``n`` exactly once.

    Order is reverse-lexicographic on the multiplicity vector ``(i_1, i_2, ...)``:
    the largest admissible ``i_1`` comes first, then ``i_2`` and so on. For
    ``n = 3`` this gives ``(3)``, ``(1, 1)``, ``(0, 0, 1)``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > cap:
        raise ResourceCapError(f"n = {n} exceeds the partition cap {cap}; raise the cap explicitly")
    counts = [0] * n

    def rec(l: int, remaining: int):
        if remaining == 0:
            yield CycleType(tuple(counts[: l - 1]))
            return
        if l == remaining:
            counts[l - 1] = 1
            yield CycleType(tuple(counts[:l]))
            counts[l - 1] = 0
            return
        for c in range(remaining // l, -1, -1):
            rest = remaining - l * c
            if 0 < rest <= l:
                # leftover too small for any longer cycle
                continue
            counts[l - 1] = c
            yield from rec(l + 1, rest)
        counts[l - 1] = 0

    yield from rec(1, n)


@dataclass(frozen=True)
class ExactPmf:
    """Exact distribution on ``1..n`` stored as integer numerators over a common denominator.

    ``numerators[v - 1]`` is the numerator of the mass at ``v``. Reduction to
    lowest terms only happens in :meth:`mass` and the display helpers.
    """

    numerators: tuple[int, ...]
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        if any(a < 0 for a in self.numerators):
            raise ValueError("negative mass")
        if self.numerators and sum(self.numerators) != self.denominator:
            raise ValueError("masses do not sum to 1")

    @property
    def support(self) -> range:
        return range(1, len(self.numerators) + 1)

    def mass(self, v: int) -> Fraction:
        if 1 <= v <= len(self.numerators):
            return Fraction(self.numerators[v - 1], self.denominator)
        return Fraction(0)

    def expectation(self) -> Fraction:
        if not self.numerators:
            return Fraction(0)
        total = sum(v * a for v, a in enumerate(self.numerators, start=1))
        return Fraction(total, self.denominator)

    def rows(self):
        """``(value, numerator, denominator, float)`` rows with masses in lowest terms."""
        for v, a in enumerate(self.numerators, start=1):
            f = Fraction(a, self.denominator)
            yield v, f.numerator, f.denominator, float(f)


@dataclass(frozen=True)
class ExactDistributions:
    n: int
    K: ExactPmf
    M: ExactPmf
    T: ExactPmf
    type_counts: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def ExK(self) -> Fraction:
        return self.K.expectation()

    @property
    def ExM(self) -> Fraction:
        return self.M.expectation()

    @property
    def ExT(self) -> Fraction:
        return self.T.expectation()


@lru_cache(maxsize=128)
def exact_distributions(n: int, cap: int = DEFAULT_PARTITION_CAP) -> ExactDistributions:
    """Exact laws of the cycle count K_n, longest cycle M_n and shortest cycle T_n.

    Built by summing cyclation class sizes over all cycle types of weight
    ``n``; the common denominator is ``(2n-1)!!``. For ``n = 0`` the pmfs are
    empty and every expectation is 0.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        empty = ExactPmf((), 1)
        return ExactDistributions(0, empty, empty, empty, {CycleType(()): 1})
    denom = odd_double_factorial(n)
    K = [0] * n
    M = [0] * n
    T = [0] * n
    by_type = {}
    # hoist the factorial work out of the per-type loop
    fact = [math.factorial(c) for c in range(n + 1)]
    top = math.factorial(n) << n
    for t in enumerate_cycle_types(n, cap):
        d = 1
        for l, c in enumerate(t.counts, start=1):
            if c:
                d *= (2 * l) ** c * fact[c]
        size = top // d
        by_type[t] = size
        K[t.parts - 1] += size
        M[t.longest - 1] += size
        T[t.shortest - 1] += size
    return ExactDistributions(
        n, ExactPmf(tuple(K), denom), ExactPmf(tuple(M), denom), ExactPmf(tuple(T), denom), by_type
    )


class SingleCycle(NamedTuple):
    exact: Fraction
    value: float
    asymptote: float

    @property
    def ratio(self) -> float:
        return self.value / self.asymptote


def single_cycle_prob(n: int) -> SingleCycle:
    """Probability that a random n-cyclation is one cycle, with its ``sqrt(pi/n)/2`` asymptote."""
    if n < 1:
        raise ValueError("n must be at least 1")
    exact = Fraction(cyclation_count(n, 1), odd_double_factorial(n))
    return SingleCycle(exact, float(exact), 0.5 * math.sqrt(math.pi / n))


def cycle_count_expectation(n: int) -> Fraction:
    """``sum_{m<=n} 1/(2m-1)``, the expected number of cycles, straight from the counts."""
    total = sum(k * cyclation_count(n, k) for k in range(1, n + 1))
    return Fraction(total, odd_double_factorial(n))


def counts_by_parts(n: int, sizes: dict) -> list[int]:
    """Group a ``{CycleType: count}`` map by number of cycles ``k = 0..n``."""
    out = [0] * (n + 1)
    for t, c in sizes.items():
        out[t.parts] += c
    return out


def class_sizes(n: int, kind: str = "cyclation", cap: int = DEFAULT_PARTITION_CAP) -> dict:
    """``{CycleType: class size}`` for every type of weight ``n``."""
    f = {"cyclation": cyc_class_size, "permutation": perm_class_size}[kind]
    return {t: f(t) for t in enumerate_cycle_types(n, cap)}

