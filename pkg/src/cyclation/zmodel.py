"""Random z-cyclations: independent Poisson cycle counts with means ``z**l / (2l)``.

Conditioned on the total number of intervals ``nu = n`` a z-cyclation is a
uniform n-cyclation, so expectations over the z-model are generating
functions (in ``z``) of the finite-n expectations. This module holds the
exact laws of ``nu`` and of the extreme cycle lengths ``M_z`` and ``T_z``,
two samplers, and the roots ``x_l`` of ``E(x_l) = 2 (t_inf - t_l)``.

Conventions: ``t_l = sum_{m < l} z**m / (2m)`` (so ``t_1 = 0``),
``t_inf = log(1/(1-z)) / 2`` and ``tail(l) = t_inf - t_l``, which is summed
directly rather than formed by subtraction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .exact import CycleType, ResourceCapError, exact_distributions
from .special import expint_E

# stored tails extend until the neglected remainder is below this
_REMAINDER_ABS = 1e-22
_MAX_TERMS = 50_000_000


class ConfigurationError(RuntimeError):
    """A requested accuracy cannot be certified with the current settings."""


@dataclass(frozen=True)
class ZParams:
    """Poissonization parameter with cached partial sums.

    ``terms[m - 1] = z**m / (2m)``; ``tails[l - 1] = sum_{m >= l} terms``
    for ``l = 1 .. L + 1`` where ``L`` is :attr:`horizon`.
    """

    z: float
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.z < 1.0:
            raise ValueError(f"z must lie in (0, 1), got {self.z}")

    @property
    def t_inf(self) -> float:
        return -0.5 * math.log1p(-self.z)

    @cached_property
    def horizon(self) -> int:
        z = self.z
        # remainder after L terms is at most z**(L+1) / (2 (L+1) (1-z))
        lz = math.log(z)
        L = max(1, int(math.ceil((math.log(_REMAINDER_ABS * 2 * (1 - z))) / lz)))
        if L > _MAX_TERMS:
            raise ConfigurationError(f"z = {z} needs {L} series terms; limit is {_MAX_TERMS}")
        return L

    @cached_property
    def terms(self) -> np.ndarray:
        m = np.arange(1, self.horizon + 1, dtype=float)
        return np.exp(m * math.log(self.z)) / (2.0 * m)

    @cached_property
    def tails(self) -> np.ndarray:
        # reverse cumulative sum adds the smallest terms first
        rev = np.cumsum(self.terms[::-1])[::-1]
        return np.append(rev, 0.0)

    @cached_property
    def partial(self) -> np.ndarray:
        """``partial[l - 1] = t_l`` for ``l = 1 .. L + 1``."""
        return np.concatenate(([0.0], np.cumsum(self.terms)))

    def term(self, l: int) -> float:
        return math.exp(l * math.log(self.z)) / (2 * l)

    def t(self, l: int) -> float:
        if l < 1:
            raise ValueError("l must be at least 1")
        if l <= self.horizon + 1:
            return float(self.partial[l - 1])
        return self.t_inf - self.tail(l)

    def tail(self, l: int) -> float:
        """``t_inf - t_l`` summed directly."""
        if l < 1:
            raise ValueError("l must be at least 1")
        if l <= self.horizon + 1:
            return float(self.tails[l - 1])
        # beyond the table: sum until terms vanish
        out, m = 0.0, l
        while True:
            a = self.term(m)
            out += a
            if a < 1e-300 or a < out * 1e-17:
                return out
            m += 1


class ZDraw(NamedTuple):
    cycle_type: CycleType
    nu: int
    kappa: int

    @property
    def longest(self) -> int:
        return self.cycle_type.longest

    @property
    def shortest(self) -> int:
        return self.cycle_type.shortest


def nu_pmf(zp: ZParams, n: int) -> float:
    """``Pr[nu = n] = sqrt(1-z) z**n binom(2n, n) / 4**n``."""
    if n < 0:
        return 0.0
    z = zp.z
    if n <= 500:
        central = math.comb(2 * n, n) / 4**n
        return math.sqrt(1 - z) * z**n * central
    log_central = math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - n * math.log(4.0)
    return math.exp(0.5 * math.log1p(-z) + n * math.log(z) + log_central)


def nu_mean(zp: ZParams) -> float:
    return 0.5 * zp.z / (1 - zp.z)


def _survival_lengths(zp: ZParams, v: np.ndarray) -> np.ndarray:
    """Cycle lengths by inversion: ``Pr[length > l] = tail(l + 1) / t_inf``."""
    surv = zp.tails[1:] / zp.t_inf  # surv[l-1] = Pr[length > l], decreasing
    # length = 1 + #{l : surv(l) > v}
    idx = np.searchsorted(-surv, -v, side="left")
    lengths = idx + 1
    beyond = v < surv[-1]
    if np.any(beyond):
        # below the table the law is within 1e-22 of geometric with ratio z
        L = zp.horizon
        extra = np.floor(np.log(v[beyond] / surv[-1]) / math.log(zp.z)).astype(np.int64)
        lengths[beyond] = L + 1 + extra
    return lengths


def sample_z(zp: ZParams, rng: np.random.Generator, method: str = "compound") -> ZDraw:
    """One random z-cyclation cycle structure.

    ``compound`` draws the Poisson cycle count ``kappa`` (mean ``t_inf``) and
    then ``kappa`` iid lengths with ``Pr[l] = z**l / (2 l t_inf)``.
    ``poisson`` draws each ``iota_l`` separately up to the stored horizon,
    where the neglected mass is below 1e-22; it is kept for cross-checks.
    """
    if method == "compound":
        kappa = int(rng.poisson(zp.t_inf))
        lengths = _survival_lengths(zp, rng.random(kappa)) if kappa else np.empty(0, np.int64)
        ct = CycleType.from_lengths(lengths.tolist())
    elif method == "poisson":
        iota = rng.poisson(zp.terms)
        ct = CycleType(tuple(iota.tolist()))
    else:
        raise ValueError(f"unknown method {method!r}")
    return ZDraw(ct, ct.weight, ct.parts)


class ZBatch(NamedTuple):
    nu: np.ndarray
    kappa: np.ndarray
    longest: np.ndarray
    shortest: np.ndarray
    lengths: np.ndarray
    offsets: np.ndarray

    def lengths_of(self, i: int) -> np.ndarray:
        return self.lengths[self.offsets[i] : self.offsets[i + 1]]


def sample_z_batch(zp: ZParams, reps: int, rng: np.random.Generator) -> ZBatch:
    """``reps`` independent z-cyclations by the compound construction, vectorized.

    Empty draws (``nu = 0``) have longest and shortest cycle 0.
    """
    kappa = rng.poisson(zp.t_inf, size=reps).astype(np.int64)
    total = int(kappa.sum())
    lengths = _survival_lengths(zp, rng.random(total)).astype(np.int64)
    offsets = np.concatenate(([0], np.cumsum(kappa)))
    owner = np.repeat(np.arange(reps), kappa)
    nu = np.bincount(owner, weights=lengths, minlength=reps).astype(np.int64)
    longest = np.zeros(reps, np.int64)
    shortest = np.zeros(reps, np.int64)
    nz = kappa > 0
    if total:
        starts = offsets[:-1][nz]
        longest[nz] = np.maximum.reduceat(lengths, starts)
        shortest[nz] = np.minimum.reduceat(lengths, starts)
    return ZBatch(nu, kappa, longest, shortest, lengths, offsets)


def _check_which(which: str) -> None:
    if which not in ("longest", "shortest"):
        raise ValueError(f"which must be 'longest' or 'shortest', got {which!r}")


def extreme_pmf_z(zp: ZParams, which: str, l: int) -> float:
    """``Pr[M_z = l]`` or ``Pr[T_z = l]`` for ``l >= 1``.

    Longest: ``exp(-tail(l+1)) - exp(-tail(l))``; shortest:
    ``exp(-t_l) - exp(-t_{l+1})``. Both are written as
    ``exp(-.) * (1 - exp(-z**l / 2l))`` to avoid cancellation.
    """
    _check_which(which)
    if l < 1:
        raise ValueError("l must be at least 1")
    jump = -math.expm1(-zp.term(l))
    if which == "longest":
        return math.exp(-zp.tail(l + 1)) * jump
    return math.exp(-zp.t(l)) * jump


def extreme_pmf_z_array(zp: ZParams, which: str) -> np.ndarray:
    """Masses for ``l = 1 .. horizon`` in one pass."""
    _check_which(which)
    jump = -np.expm1(-zp.terms)
    if which == "longest":
        return np.exp(-zp.tails[1:]) * jump
    return np.exp(-zp.partial[:-1]) * jump


class ZExpectation(NamedTuple):
    value: float
    tail_bound: float
    terms: int


def ex_extreme_z(zp: ZParams, which: str, rel_tol: float = 1e-10) -> ZExpectation:
    """``Ex[M_z]`` or ``Ex[T_z]`` with a certified truncation bound.

    Both pmfs are at most ``z**l / (2l)``, so the neglected part of
    ``sum l * pmf`` past ``L`` is at most ``z**(L+1) / (2 (1-z))``.
    """
    pmf = extreme_pmf_z_array(zp, which)
    L = len(pmf)
    value = math.fsum(np.arange(1, L + 1) * pmf)
    bound = zp.z ** (L + 1) / (2 * (1 - zp.z))
    if not bound <= rel_tol * value:
        raise ConfigurationError(f"tail bound {bound:g} exceeds {rel_tol:g} relative at z = {zp.z}")
    return ZExpectation(value, bound, L)


def xl_bracket(zp: ZParams, l: int) -> tuple[float, float]:
    """``(-(l-1) log z, -l log z)``, the interval that must contain ``x_l``."""
    lz = -math.log(zp.z)
    return (l - 1) * lz, l * lz


def solve_xl(zp: ZParams, l: int) -> float:
    """Root ``x_l`` of ``E(x) = 2 tail(l)``.

    Bisection inside :func:`xl_bracket` to width 1e-14, then one secant
    step that is kept only if it stays inside the final bracket.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    target = 2.0 * zp.tail(l)
    lo, hi = xl_bracket(zp, l)

    def f(x):
        return expint_E(x) - target

    f_hi = f(hi)
    f_lo = math.inf if lo == 0.0 else f(lo)
    if not (f_lo > 0 > f_hi):
        raise ArithmeticError(f"x_{l} is not bracketed at z = {zp.z}")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm > 0:
            lo, f_lo = mid, fm
        elif fm < 0:
            hi, f_hi = mid, fm
        else:
            return mid
    if math.isfinite(f_lo) and f_lo != f_hi:
        x = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        if lo <= x <= hi:
            return x
    return 0.5 * (lo + hi)


class MixtureCheck(NamedTuple):
    residual: float
    direct: float
    mixture: float
    nu_tail_bound: float


def mixture_identity_check(zp: ZParams, which: str, n_trunc: int = 40) -> MixtureCheck:
    """Compare ``Ex[M_z]`` (or ``Ex[T_z]``) with ``sum_{n <= N} Pr[nu=n] Ex[M_n]``.

    ``Ex[M_n] <= n``, so the truncation error is at most
    ``sum_{n > N} n Pr[nu = n]``, reported as ``nu_tail_bound``.
    """
    _check_which(which)
    direct = ex_extreme_z(zp, which).value
    parts = []
    for n in range(n_trunc + 1):
        d = exact_distributions(n)
        ex = d.ExM if which == "longest" else d.ExT
        parts.append(nu_pmf(zp, n) * float(ex))
    mixture = math.fsum(parts)
    # nu_pmf(n+1)/nu_pmf(n) = z (2n+1)/(2n+2) < z, so the tail is dominated geometrically
    p = nu_pmf(zp, n_trunc + 1)
    N1 = n_trunc + 1
    bound = p * (N1 / (1 - zp.z) + zp.z / (1 - zp.z) ** 2)
    return MixtureCheck(abs(direct - mixture), direct, mixture, bound)


# -- finite-n expectations by coefficient extraction ---------------------------------------
#
# Pr[T_n >= l] = [z^n] exp(sum_{m >= l} z^m/2m) / c_n and
# Pr[M_n <= l] = [z^n] exp(sum_{m <= l} z^m/2m) / c_n with c_n = binom(2n,n)/4^n.
# If f = sum b_k z^k = exp(g) then k b_k = sum_m m g_m b_{k-m}, which gives O(n) per l.

COEFF_CAP = {"shortest": 20_000, "longest": 4_000}


def _central(n: int) -> float:
    return math.exp(math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - n * math.log(4.0))


def _central_array(n: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((2 * k - 1) / (2 * k))))


def _ex_shortest_coeff(n: int) -> float:
    cn = _central(n)
    single = 1.0 / (2 * n) / cn  # only a single n-cycle has all cycles longer than n/2
    total = [(n - n // 2) * single]
    for l in range(1, n // 2 + 1):
        b = np.zeros(n + 1)
        b[0] = 1.0
        S = np.zeros(n + 1)
        S[:l] = 1.0
        k = l
        while k <= n:
            hi = min(k + l, n + 1)
            idx = np.arange(k, hi)
            b[k:hi] = 0.5 * S[idx - l] / idx
            S[k:hi] = S[k - 1] + np.cumsum(b[k:hi])
            k = hi
        total.append(b[n] / cn)
    return math.fsum(total)


def _ex_longest_coeff(n: int) -> float:
    c = _central_array(n)
    half = n // 2
    # l >= n/2: Pr[M_n > l] = sum_{j > l} c_{n-j} / (2j c_n)
    j = np.arange(1, n + 1)
    big = (c[n - j] / (2.0 * j)) / c[n]
    suffix = np.cumsum(big[::-1])[::-1]  # suffix[i] = sum_{j >= i+1}
    total = [float(suffix[l]) for l in range(max(half, 1), n)]
    if half >= 1:
        ls = np.arange(1, half)  # bounds l = 1 .. half-1 (l = 0 handled below)
        if len(ls):
            S = np.zeros((n + 1, len(ls)))
            S[0] = 1.0
            for k in range(1, n + 1):
                lower = k - ls - 1
                win = S[k - 1] - np.where(lower >= 0, S[np.maximum(lower, 0), np.arange(len(ls))], 0.0)
                S[k] = S[k - 1] + 0.5 * win / k
            bn = S[n] - S[n - 1]
            total.extend((1.0 - bn / c[n]).tolist())
    total.append(1.0)  # l = 0
    return math.fsum(total)


def extreme_expectation_coeff(n: int, which: str, cap: int | None = None) -> float:
    """Double-precision ``Ex[M_n]`` or ``Ex[T_n]`` by power-series coefficients.

    Exact in exact arithmetic; costs ``O(n**2)`` flops, so ``n`` is capped
    (:data:`COEFF_CAP`).
    """
    _check_which(which)
    cap = COEFF_CAP[which] if cap is None else cap
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > cap:
        raise ResourceCapError(f"n = {n} exceeds the coefficient cap {cap} for {which}")
    if n == 0:
        return 0.0
    if which == "shortest":
        return _ex_shortest_coeff(n)
    return _ex_longest_coeff(n)
