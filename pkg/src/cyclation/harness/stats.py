"""Pearson chi-square goodness of fit with bin pooling, and the reseed-retry gate."""
from __future__ import annotations

from typing import Callable, Mapping, NamedTuple

from scipy.stats import chi2

DEFAULT_ALPHA = 1e-3
MIN_EXPECTED = 5.0


class ChiSquareResult(NamedTuple):
    statistic: float
    dof: int
    pvalue: float
    bins: int


def chi_square_test(observed: Mapping, expected: Mapping, reps: int | None = None) -> ChiSquareResult:
    """Pearson test of observed counts against an expected pmf.

    ``expected`` maps bins to probabilities (renormalised over its keys).
    Bins with expected count below 5 are pooled into one bin; if the pool
    is still below 5 it absorbs the next smallest bin. Observations outside
    the expected support make the statistic infinite.
    """
    if reps is None:
        reps = sum(observed.values())
    if reps <= 0:
        raise ValueError("no observations")
    mass = {k: float(v) for k, v in expected.items() if v > 0}
    total_mass = sum(mass.values())
    if not mass or total_mass <= 0:
        raise ValueError("expected distribution has empty support")
    stray = sum(c for k, c in observed.items() if k not in mass)
    if stray:
        return ChiSquareResult(float("inf"), max(len(mass) - 1, 1), 0.0, len(mass))

    cells = sorted(((reps * p / total_mass, observed.get(k, 0)) for k, p in mass.items()), key=lambda c: c[0])
    pooled_e = pooled_o = 0.0
    while cells and (cells[0][0] < MIN_EXPECTED or (0 < pooled_e < MIN_EXPECTED)):
        e, o = cells.pop(0)
        pooled_e += e
        pooled_o += o
    if pooled_e > 0:
        cells.append((pooled_e, pooled_o))
    if len(cells) < 2:
        raise ValueError("fewer than two bins after pooling; the test is degenerate")
    stat = sum((o - e) ** 2 / e for e, o in cells)
    dof = len(cells) - 1
    return ChiSquareResult(stat, dof, float(chi2.sf(stat, dof)), len(cells))


class GateResult(NamedTuple):
    passed: bool
    attempts: list


def statistical_gate(run: Callable[[int], ChiSquareResult], seed: int,
                     alpha: float = DEFAULT_ALPHA, retries: int = 1) -> GateResult:
    """Run ``run(seed)``; on ``p <= alpha`` retry with ``seed + 1``, up to ``retries`` times."""
    attempts = []
    for i in range(retries + 1):
        res = run(seed + i)
        attempts.append((seed + i, res))
        if res.pvalue > alpha:
            return GateResult(True, attempts)
    return GateResult(False, attempts)
