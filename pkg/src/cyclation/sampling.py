"""Samplers for random n-cyclations and n-permutations.

Endpoint labels are ``0 .. 2n-1``; interval ``m`` owns endpoints ``2m`` and
``2m + 1``. A :class:`Pairing` stores ``partner[e]`` for every endpoint.

Randomness comes from ``numpy.random.Generator`` (PCG64). Batch runs derive
one stream per worker from ``SeedSequence(seed, spawn_key=(n,)).spawn(workers)``,
so a run is reproducible for a fixed ``(seed, n, reps, workers)``.
"""
from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exact import CycleType

WORKERS_ENV = "CYCLATION_WORKERS"
RNG_IDENTITY = "numpy.random.PCG64 via SeedSequence(seed, spawn_key=(n,)).spawn(workers)"


class StructureError(ValueError):
    """A partner array is not a fixed-point-free involution."""


@dataclass(frozen=True, eq=False)
class Pairing:
    partner: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.partner, dtype=np.int64)
        p.setflags(write=False)
        object.__setattr__(self, "partner", p)

    @property
    def n(self) -> int:
        return len(self.partner) // 2

    def validate(self) -> "Pairing":
        p = self.partner
        m = len(p)
        if m % 2:
            raise StructureError("odd number of endpoints")
        if m == 0:
            return self
        if p.min() < 0 or p.max() >= m:
            raise StructureError("partner label out of range")
        idx = np.arange(m)
        if np.any(p == idx):
            raise StructureError("endpoint paired with itself")
        if np.any(p[p] != idx):
            raise StructureError("partner map is not an involution")
        return self

    def edges(self) -> list[tuple[int, int]]:
        return [(e, int(f)) for e, f in enumerate(self.partner) if e < f]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Pairing":
        p = np.full(2 * n, -1, dtype=np.int64)
        for a, b in edges:
            p[a] = b
            p[b] = a
        return cls(p).validate()

    def to_line(self) -> str:
        """``n`` followed by the partner sequence, space separated."""
        return " ".join(map(str, [self.n, *self.partner.tolist()]))

    @classmethod
    def from_line(cls, line: str) -> "Pairing":
        fields = line.split()
        if not fields:
            raise StructureError("empty pairing line")
        n = int(fields[0])
        partner = [int(x) for x in fields[1:]]
        if len(partner) != 2 * n:
            raise StructureError(f"expected {2 * n} partner entries, got {len(partner)}")
        return cls(np.array(partner, dtype=np.int64)).validate()

    def key(self) -> tuple[int, ...]:
        return tuple(self.partner.tolist())

    def __eq__(self, other):
        return isinstance(other, Pairing) and np.array_equal(self.partner, other.partner)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Pairing({self.edges()})"


def sample_cyclation(n: int, rng: np.random.Generator, method: str = "sequential") -> Pairing:
    """Uniform random n-cyclation.

    ``sequential``: walk a working array of unpaired endpoints; the next
    unpaired one is matched with a uniform choice among those remaining
    (a partial Fisher-Yates pass, one draw per pairing edge).
    ``shuffle``: uniformly permute all ``2n`` labels and pair positions
    ``(0, 1), (2, 3), ...``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    m = 2 * n
    if method == "shuffle":
        order = rng.permutation(m)
        a, b = order[0::2], order[1::2]
    elif method == "sequential":
        work = np.arange(m)
        # choice for slot 2i+1 is uniform on positions 2i+1 .. m-1
        spans = m - 1 - 2 * np.arange(n)
        picks = 2 * np.arange(n) + 1 + (rng.random(n) * spans).astype(np.int64)
        for i in range(n):
            j, s = picks[i], 2 * i + 1
            work[s], work[j] = work[j], work[s]
        a, b = work[0::2], work[1::2]
    else:
        raise ValueError(f"unknown method {method!r}")
    partner = np.empty(m, dtype=np.int64)
    partner[a] = b
    partner[b] = a
    return Pairing(partner)


def cycles_of(p: Pairing, check: bool = True) -> tuple[int, ...]:
    """Cycle lengths (in intervals) of a pairing, in decreasing order.

    Traverses interval edge, pairing edge, interval edge, ... from each
    unvisited interval; every interval is visited once.
    """
    if check:
        p.validate()
    partner = p.partner.tolist()
    n = len(partner) // 2
    seen = bytearray(n)
    lengths = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        e = 2 * start
        while True:
            m = e >> 1
            if seen[m]:
                if m != start:
                    raise StructureError("traversal revisited an interval")
                break
            seen[m] = 1
            length += 1
            e = partner[e ^ 1]
        lengths.append(length)
    lengths.sort(reverse=True)
    return tuple(lengths)


def cycle_type_of(p: Pairing) -> CycleType:
    return CycleType.from_lengths(cycles_of(p))


def insert_interval(p: Pairing, rng: np.random.Generator | None = None, choice: int | None = None) -> Pairing:
    """Add interval ``n`` (endpoints ``a = 2n``, ``b = 2n + 1``).

    One of ``2n + 1`` outcomes is chosen uniformly (or given as ``choice``):
    ``choice == 2n`` pairs ``a`` with ``b``; otherwise ``x = choice`` and its
    partner ``y`` are split into ``{x, a}`` and ``{y, b}``. Each existing edge
    is reached from both of its ends, giving both orientations.
    """
    n = p.n
    if choice is None:
        if rng is None:
            raise ValueError("need rng or choice")
        choice = int(rng.integers(0, 2 * n + 1))
    if not 0 <= choice <= 2 * n:
        raise ValueError(f"choice must be in 0..{2 * n}")
    a, b = 2 * n, 2 * n + 1
    partner = np.empty(2 * n + 2, dtype=np.int64)
    partner[: 2 * n] = p.partner
    if choice == 2 * n:
        partner[a], partner[b] = b, a
    else:
        x = choice
        y = int(p.partner[x])
        partner[x], partner[a] = a, x
        partner[y], partner[b] = b, y
    return Pairing(partner)


def delete_interval(p: Pairing, index: int | None = None) -> Pairing:
    """Remove interval ``index`` (default: the last one).

    If it closes on itself the rest is untouched; otherwise the two
    endpoints it was paired with are joined. Intervals above ``index`` are
    relabelled down by one, preserving order.
    """
    n = p.n
    if index is None:
        index = n - 1
    if not 0 <= index < n:
        raise IndexError(f"interval index {index} out of range for n = {n}")
    partner = p.partner.copy()
    u, v = 2 * index, 2 * index + 1
    if partner[u] != v:
        x, y = partner[u], partner[v]
        partner[x], partner[y] = y, x
    keep = np.ones(2 * n, dtype=bool)
    keep[[u, v]] = False
    rest = partner[keep]
    rest = rest - 2 * (rest > v)
    return Pairing(rest)


# -- cycle structure without materialising the pairing --------------------------------------


def _closing_probs(n: int, kind: str) -> np.ndarray:
    r = np.arange(n - 1, -1, -1, dtype=float)
    if kind == "cyclation":
        return 1.0 / (2.0 * r + 1.0)
    if kind == "permutation":
        return 1.0 / (r + 1.0)
    raise ValueError(f"unknown kind {kind!r}")


def sample_cycle_lengths(n: int, rng: np.random.Generator, kind: str = "cyclation",
                         probs: np.ndarray | None = None) -> np.ndarray:
    """Cycle lengths of a uniform n-cyclation (or n-permutation) in discovery order.

    Sequential pairing that always extends the open chain: with ``r``
    untouched intervals left, the chain's free end meets one of ``2r + 1``
    free endpoints, and closes the cycle with probability ``1/(2r + 1)``.
    For permutations the closing probability is ``1/(r + 1)``. The closing
    events are independent, so the whole draw is one vectorized comparison.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if probs is None:
        probs = _closing_probs(n, kind)
    close = np.flatnonzero(rng.random(n) < probs)
    return np.diff(close, prepend=-1)


def sample_permutation_cycles(n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Cycle lengths of a uniform n-permutation (Chinese-restaurant construction), decreasing."""
    return tuple(sorted(sample_cycle_lengths(n, rng, "permutation").tolist(), reverse=True))


# -- batch statistics -----------------------------------------------------------------------


@dataclass
class Moments:
    count: int = 0
    total: int = 0
    total_sq: int = 0

    def add(self, values: np.ndarray) -> None:
        v = [int(x) for x in values]
        self.count += len(v)
        self.total += sum(v)
        self.total_sq += sum(x * x for x in v)

    def merge(self, other: "Moments") -> "Moments":
        return Moments(self.count + other.count, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else float("nan")

    @property
    def variance(self) -> float:
        """Unbiased sample variance, from exact integer sums."""
        c = self.count
        if c < 2:
            return 0.0
        num = c * self.total_sq - self.total * self.total
        return max(num, 0) / (c * (c - 1))

    @property
    def stderr(self) -> float:
        return (self.variance / self.count) ** 0.5 if self.count else float("nan")


STAT_NAMES = {
    "cyclation": ("K", "M", "T", "T_ge4"),
    "permutation": ("K", "L", "S"),
}


@dataclass
class SummaryStats:
    """Per-statistic moments and histograms for a batch.

    Statistics are ``K`` (cycle count), ``M``/``T`` (longest/shortest
    cycle) for cyclations and ``L``/``S`` for permutations. ``T_ge4`` is
    ``T`` on draws with at least four cycles and 0 otherwise; the
    stratified shortest-cycle estimator needs it. Sums are exact integers,
    so merging is associative and commutative.
    """

    n: int
    reps: int
    seed: int
    mode: str
    workers: int = 1
    moments: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)

    def merge(self, other: "SummaryStats") -> "SummaryStats":
        if (self.n, self.mode) != (other.n, other.mode):
            raise ValueError("cannot merge stats for different n or mode")
        moments = {k: self.moments[k].merge(other.moments[k]) for k in self.moments}
        hist = {k: self.histograms[k] + other.histograms[k] for k in self.histograms}
        return SummaryStats(self.n, self.reps + other.reps, self.seed, self.mode, self.workers, moments, hist)

    def mean(self, name: str) -> float:
        return self.moments[name].mean

    def variance(self, name: str) -> float:
        return self.moments[name].variance

    def stderr(self, name: str) -> float:
        return self.moments[name].stderr

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "mode": self.mode,
            "workers": self.workers,
            "rng": RNG_IDENTITY,
            "stats": {
                k: {"mean": m.mean, "variance": m.variance, "stderr": m.stderr}
                for k, m in self.moments.items()
            },
            "histograms": {
                k: [[int(v), int(c)] for v, c in sorted(h.items())] for k, h in self.histograms.items()
            },
        }


def _run_chunk(n: int, reps: int, seed_seq: np.random.SeedSequence, mode: str, seed: int) -> SummaryStats:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    probs = _closing_probs(n, mode)
    K = np.empty(reps, np.int64)
    big = np.empty(reps, np.int64)
    small = np.empty(reps, np.int64)
    for i in range(reps):
        lengths = sample_cycle_lengths(n, rng, probs=probs)
        K[i] = len(lengths)
        big[i] = lengths.max()
        small[i] = lengths.min()
    names = STAT_NAMES[mode]
    moments = {name: Moments() for name in names}
    moments[names[0]].add(K)
    moments[names[1]].add(big)
    moments[names[2]].add(small)
    if mode == "cyclation":
        moments["T_ge4"].add(np.where(K >= 4, small, 0))
    hist = {names[1]: Counter(big.tolist()), names[2]: Counter(small.tolist())}
    return SummaryStats(n, reps, seed, mode, 1, moments, hist)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def split_reps(reps: int, workers: int) -> list[int]:
    base, extra = divmod(reps, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def batch_stats(n: int, reps: int, seed: int, mode: str = "cyclation", workers: int | None = None) -> SummaryStats:
    """Monte Carlo summary of ``reps`` draws.

    Worker ``w`` handles ``split_reps(reps, workers)[w]`` draws from stream
    ``SeedSequence(seed, spawn_key=(n,)).spawn(workers)[w]``, so different
    ``n`` never share a stream. Partial results are merged in
    worker order, so output depends only on ``(n, reps, seed, mode, workers)``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    if mode not in STAT_NAMES:
        raise ValueError(f"unknown mode {mode!r}")
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ValueError("workers must be at least 1")
    workers = min(workers, reps)
    streams = np.random.SeedSequence(seed, spawn_key=(n,)).spawn(workers)
    sizes = split_reps(reps, workers)
    if workers == 1:
        parts = [_run_chunk(n, sizes[0], streams[0], mode, seed)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, n, k, s, mode, seed) for k, s in zip(sizes, streams)]
            parts = [f.result() for f in futures]
    out = parts[0]
    for part in parts[1:]:
        out = out.merge(part)
    out.workers = workers
    return out


def histogram_csv(hist: Counter) -> str:
    lines = ["length,count"]
    lines.extend(f"{v},{c}" for v, c in sorted(hist.items()))
    return "\n".join(lines) + "\n"
