"""Run every invariant suite and report pass/fail per check, with context values.

Failures are returned as data; nothing here raises on a failed invariant.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from ..exact import (
    class_sizes,
    counts_by_parts,
    cyclation_count,
    cyclation_count_by_product,
    exact_distributions,
    odd_double_factorial,
    single_cycle_prob,
    stirling_first,
)
from ..special import EULER_GAMMA, constants, harmonic
from ..zmodel import (
    ZParams,
    extreme_pmf_z_array,
    mixture_identity_check,
    nu_pmf,
    solve_xl,
    xl_bracket,
)
from .experiments import (
    cycle_type_fit,
    deletion_fit,
    insertion_fit,
    pairing_uniformity,
    z_conditional_fit,
)
from .oracle import brute_force_enumerate
from .stats import statistical_gate

IDENTITY_MAX_N = 30
PARTITION_SUM_MAX_N = 20
EXPECTATION_MAX_N = 40
CONSTANT_TOL = 5e-5
# four-decimal published values
PUBLISHED = {"longest_cyc": 0.7578, "shortest_cyc": 1.4572, "longest_perm": 0.6243, "shortest_perm_coeff": 0.5614}


@dataclass
class CheckResult:
    name: str
    passed: bool
    context: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "context": self.context}


@dataclass
class VerifyReport:
    checks: list
    elapsed: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures()),
            "checks": [c.as_dict() for c in self.checks],
        }


def check_identities(max_n: int = IDENTITY_MAX_N) -> list[CheckResult]:
    """Cyclation counts against the Stirling route, the product expansion, and row sums."""
    bad_scaling, bad_product, bad_sum, bad_perm_sum = [], [], [], []
    for n in range(max_n + 1):
        for k in range(n + 1):
            c = cyclation_count(n, k)
            if c != 2 ** (n - k) * stirling_first(n, k):
                bad_scaling.append((n, k))
            if c != cyclation_count_by_product(n, k):
                bad_product.append((n, k))
        if sum(cyclation_count(n, k) for k in range(n + 1)) != odd_double_factorial(n):
            bad_sum.append(n)
        if sum(stirling_first(n, k) for k in range(n + 1)) != math.factorial(n):
            bad_perm_sum.append(n)
    ctx = {"max_n": max_n}
    return [
        CheckResult("cyclation_count = 2^(n-k) stirling_first", not bad_scaling, {**ctx, "mismatches": bad_scaling[:10]}),
        CheckResult("cyclation_count = rising even product coefficient", not bad_product, {**ctx, "mismatches": bad_product[:10]}),
        CheckResult("sum_k cyclation_count = (2n-1)!!", not bad_sum, {**ctx, "mismatches": bad_sum}),
        CheckResult("sum_k stirling_first = n!", not bad_perm_sum, {**ctx, "mismatches": bad_perm_sum}),
    ]


def check_partition_sums(max_n: int = PARTITION_SUM_MAX_N) -> list[CheckResult]:
    """Class sizes summed over cycle types, in total and grouped by number of cycles."""
    bad_cyc, bad_perm = [], []
    for n in range(max_n + 1):
        cyc = class_sizes(n, "cyclation")
        byk = counts_by_parts(n, cyc)
        if sum(byk) != odd_double_factorial(n) or any(byk[k] != cyclation_count(n, k) for k in range(n + 1)):
            bad_cyc.append(n)
        perm = class_sizes(n, "permutation")
        byk = counts_by_parts(n, perm)
        if sum(byk) != math.factorial(n) or any(byk[k] != stirling_first(n, k) for k in range(n + 1)):
            bad_perm.append(n)
    return [
        CheckResult("cyclation class sizes reproduce counts by k", not bad_cyc, {"max_n": max_n, "mismatches": bad_cyc}),
        CheckResult("permutation class sizes reproduce stirling_first", not bad_perm, {"max_n": max_n, "mismatches": bad_perm}),
    ]


def check_oracle(cap_n: int = 6) -> list[CheckResult]:
    """Exhaustive pairings against class sizes, exact equality per ``n``."""
    out = []
    for n in range(1, cap_n + 1):
        brute = dict(brute_force_enumerate(n, max_n=max(cap_n, 1)))
        formula = class_sizes(n, "cyclation")
        diff = {str(t): (brute.get(t, 0), formula.get(t, 0)) for t in set(brute) | set(formula)
                if brute.get(t, 0) != formula.get(t, 0)}
        out.append(CheckResult(f"oracle n={n}: brute force = class sizes", not diff,
                               {"pairings": sum(brute.values()), "types": len(formula), "mismatches": diff}))
    return out


def check_expectations(max_n: int = EXPECTATION_MAX_N) -> list[CheckResult]:
    """Exact ``Ex[K_n]``, and the monotonicity side conditions on ``Ex[M_n]`` and ``Ex[T_n]``."""
    ex = [exact_distributions(n) for n in range(max_n + 2)]
    bad_k = [n for n in range(max_n + 1) if ex[n].ExK != harmonic(2 * n).exact - harmonic(n).exact / 2]

    def violations(rule) -> list:
        out = []
        for n in range(1, max_n):
            lhs, rhs = rule(n, ex[n], ex[n + 1])
            if not lhs <= rhs:
                out.append({"n": n, "lhs": str(lhs), "rhs": str(rhs), "lhs_float": float(lhs), "rhs_float": float(rhs)})
        return out

    rules = {
        "(2n+2) Ex[M_n] <= (2n+1) Ex[M_n+1]": lambda n, a, b: ((2 * n + 2) * a.ExM, (2 * n + 1) * b.ExM),
        "(2n+3) Ex[M_n] <= (2n+1) Ex[M_n+1]": lambda n, a, b: ((2 * n + 3) * a.ExM, (2 * n + 1) * b.ExM),
        "(2n+2) Ex[T_n] <= (2n+1) Ex[T_n+1]": lambda n, a, b: ((2 * n + 2) * a.ExT, (2 * n + 1) * b.ExT),
        "n Ex[T_n] <= (n-1) Ex[T_n+1]": lambda n, a, b: (n * a.ExT, (n - 1) * b.ExT),
    }
    out = [CheckResult("Ex[K_n] = H_2n - H_n/2", not bad_k, {"max_n": max_n, "mismatches": bad_k})]
    for name, rule in rules.items():
        v = violations(rule)
        out.append(CheckResult(name, not v, {"n_range": [1, max_n - 1], "violations": len(v), "first": v[:3]}))
    return out


def check_single_cycle() -> list[CheckResult]:
    grid = [25, 50, 100, 200, 400, 800]
    ratios = [single_cycle_prob(n).ratio for n in grid]
    close = all(abs(r - 1) < 0.1 for r in ratios)
    towards = all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    return [CheckResult("single-cycle probability / asymptote -> 1", close and towards,
                        {"grid": grid, "ratios": ratios})]


def check_zmodel() -> list[CheckResult]:
    out = []
    worst = 0.0
    for z in (0.1, 0.3, 0.5, 0.9, 0.99):
        zp = ZParams(z)
        target = 1 - math.sqrt(1 - z)
        for which in ("longest", "shortest"):
            worst = max(worst, abs(math.fsum(extreme_pmf_z_array(zp, which)) - target))
    out.append(CheckResult("extreme pmfs sum to 1 - sqrt(1-z)", worst <= 1e-12, {"max_abs_error": worst}))

    worst = 0.0
    for z in (0.1, 0.3, 0.5, 0.9, 0.99, 0.999):
        zp = ZParams(z)
        worst = max(worst, abs(nu_pmf(zp, 0) - math.exp(-zp.t_inf)))
    out.append(CheckResult("Pr[nu=0]: sqrt(1-z) = exp(-t_inf)", worst <= 1e-14, {"max_abs_error": worst}))

    zp = ZParams(0.3)
    for which in ("longest", "shortest"):
        m = mixture_identity_check(zp, which, 40)
        out.append(CheckResult(f"mixture identity ({which}, z=0.3, N=40)", m.residual < 1e-6, m._asdict()))

    bad = []
    for z in (0.9, 0.99):
        zp = ZParams(z)
        for l in range(1, 101):
            lo, hi = xl_bracket(zp, l)
            try:
                x = solve_xl(zp, l)
            except ArithmeticError as exc:
                bad.append({"z": z, "l": l, "error": str(exc)})
                continue
            if not lo < x < hi:
                bad.append({"z": z, "l": l, "x": x, "bracket": [lo, hi]})
    out.append(CheckResult("x_l bracket for l <= 100, z in {0.9, 0.99}", not bad, {"violations": bad[:5]}))

    zp = ZParams(0.999)
    ratio = solve_xl(zp, 1) / (1 - zp.z)
    target = math.exp(-EULER_GAMMA)
    out.append(CheckResult("x_1/(1-z) near exp(-gamma) at z=0.999", abs(ratio / target - 1) < 0.01,
                           {"ratio": ratio, "target": target}))
    return out


def check_constants() -> list[CheckResult]:
    t0 = time.perf_counter()
    c = constants().as_dict()
    elapsed = time.perf_counter() - t0
    out = []
    for key, ref in PUBLISHED.items():
        ctx = {"value": c[key], "error_estimate": c["errors"][key], "tolerance": CONSTANT_TOL}
        out.append(CheckResult(f"constant {key} = {ref} +- {CONSTANT_TOL:g}", abs(c[key] - ref) <= CONSTANT_TOL, ctx))
        # the published digits are a truncated prefix, so also compare that way
        out.append(CheckResult(f"constant {key} truncates to {ref}", math.floor(c[key] * 1e4) == round(ref * 1e4),
                               {"value": c[key]}))
    out.append(CheckResult("constants computed in under 1 s", elapsed < 1.0, {"seconds": elapsed}))
    return out


SAMPLER_SUITES = {
    "pairings uniform (n=3)": pairing_uniformity,
    "cycle types (n=5)": cycle_type_fit,
    "insertion-grown types (n=4)": insertion_fit,
    "deletion types (n=4)": deletion_fit,
    "z-model given nu=4": z_conditional_fit,
}


def check_samplers(seed: int = 20240601) -> list[CheckResult]:
    out = []
    for i, (name, run) in enumerate(SAMPLER_SUITES.items()):
        gate = statistical_gate(run, seed + 100 * i)
        attempts = [{"seed": s, "statistic": r.statistic, "dof": r.dof, "pvalue": r.pvalue} for s, r in gate.attempts]
        out.append(CheckResult(f"chi-square: {name}", gate.passed, {"attempts": attempts}))
    return out


def verify_all(cap_n: int = 6, samplers: bool = True, seed: int = 20240601) -> VerifyReport:
    """Every suite; ``samplers=False`` skips the Monte Carlo gates."""
    t0 = time.perf_counter()
    checks = []
    checks += check_identities()
    checks += check_partition_sums()
    checks += check_oracle(cap_n)
    checks += check_expectations()
    checks += check_single_cycle()
    checks += check_zmodel()
    checks += check_constants()
    if samplers:
        checks += check_samplers(seed)
    return VerifyReport(checks, time.perf_counter() - t0)
