"""Brute-force oracles: every pairing of ``2n`` endpoints, and a union-find cycle counter."""
from __future__ import annotations

from collections import Counter
from typing import Iterator

import numpy as np

from ..exact import CycleType
from ..sampling import Pairing, cycles_of

ORACLE_MAX_N = 7


def all_pairings(n: int) -> Iterator[Pairing]:
    """Every fixed-point-free involution on ``0 .. 2n-1`` ((2n-1)!! of them).

    The lowest unpaired endpoint is matched with each remaining endpoint in
    turn, so pairings come out in lexicographic order of their edge lists.
    """
    partner = [-1] * (2 * n)

    def rec():
        try:
            e = partner.index(-1)
        except ValueError:
            yield Pairing(np.array(partner, dtype=np.int64))
            return
        for f in range(e + 1, 2 * n):
            if partner[f] == -1:
                partner[e], partner[f] = f, e
                yield from rec()
                partner[e] = partner[f] = -1

    yield from rec()


def brute_force_enumerate(n: int, max_n: int = ORACLE_MAX_N) -> Counter:
    """``{CycleType: number of pairings}`` by exhaustive enumeration, ``1 <= n <= max_n``."""
    if not 1 <= n <= max_n:
        raise ValueError(f"brute force needs 1 <= n <= {max_n}, got {n}")
    out = Counter()
    for p in all_pairings(n):
        out[CycleType.from_lengths(cycles_of(p, check=False))] += 1
    return out


def cycles_union_find(p: Pairing) -> tuple[int, ...]:
    """Cycle lengths via union-find on intervals; a benchmark foil for the traversal."""
    n = p.n
    parent = list(range(n))
    size = [1] * n

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e, f in enumerate(p.partner.tolist()):
        if e < f:
            a, b = find(e >> 1), find(f >> 1)
            if a != b:
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
    return tuple(sorted((size[r] for r in range(n) if find(r) == r), reverse=True))
