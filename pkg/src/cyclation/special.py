"""Exponential integral, harmonic numbers and the cycle-length constants.

``E(x) = integral_x^inf exp(-y)/y dy`` is evaluated by its convergent power
series for ``x <= 1.5`` and by a continued fraction above that. The four
constants are integrals of ``exp(a E(x) - x)`` over ``(0, inf)`` with
``a = -1/2`` (longest cycle, cyclations), ``a = -1`` (longest cycle,
permutations) and ``a = +1/2`` (shortest cycle, cyclations).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

# Euler-Mascheroni constant, 20 significant digits (OEIS A001620)
EULER_GAMMA = 0.57721566490153286061

SERIES_CUTOFF = 1.5
_SERIES_TERMS = 60
_CF_MAX_ITER = 10_000
_TINY = 1e-300


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""


def _ein(x):
    """Entire function ``sum_{k>=1} (-1)**(k+1) x**k / (k k!)``; ``E(x) = Ein(x) - log(x) - gamma``."""
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.zeros_like(x)
    for k in range(1, _SERIES_TERMS + 1):
        term = term * (-x) / k
        total = total - term / k
    return total


def _expint_cf(x):
    # modified Lentz on E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    x = np.asarray(x, dtype=float)
    b = x + 1.0
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _CF_MAX_ITER):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-15):
            break
    else:
        raise ArithmeticError("continued fraction for E(x) did not converge")
    return h * np.exp(-x)


def expint_log_part(x):
    """``E(x) + log(x)``, computed without cancellation near ``x = 0``."""
    x = np.asarray(x, dtype=float)
    small = x <= SERIES_CUTOFF
    out = np.empty_like(x)
    out[small] = _ein(x[small]) - EULER_GAMMA
    big = ~small
    if np.any(big):
        out[big] = _expint_cf(x[big]) + np.log(x[big])
    return out[()] if out.ndim == 0 else out


def expint_E(x, method: str = "auto"):
    """Exponential integral ``E(x) = Gamma(0, x)`` for ``x > 0``.

    ``method`` is ``"auto"`` (series below 1.5, continued fraction above),
    ``"series"`` or ``"cf"``; the forced paths exist so the two can be
    compared. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("E(x) is only defined for x > 0 (logarithmic singularity at 0)")
    if method == "series":
        out = _ein(arr) - EULER_GAMMA - np.log(arr)
    elif method == "cf":
        out = _expint_cf(arr)
    elif method == "auto":
        out = np.empty_like(arr)
        small = arr <= SERIES_CUTOFF
        out[small] = _ein(arr[small]) - EULER_GAMMA - np.log(arr[small])
        if np.any(~small):
            out[~small] = _expint_cf(arr[~small])
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre settings.

    ``substitute`` maps ``x = u**2`` so the ``sqrt(x)`` behaviour of the
    integrands at the origin becomes smooth. Panels double from
    ``initial_panels`` until two successive estimates agree within
    ``tol``.
    """

    tol: float = 1e-10
    nodes: int = 20
    initial_panels: int = 4
    max_panels: int = 1024
    upper: float = 50.0
    substitute: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.nodes < 2 or self.initial_panels < 1:
            raise ValueError("need at least 2 nodes and 1 panel")


class QuadratureResult(NamedTuple):
    value: float
    error: float
    panels: int


def _exp_weight_integrand(a: float, substitute: bool):
    """Integrand for ``integral_0^inf exp(a E(x) - x) dx`` (optionally in ``u = sqrt(x)``)."""

    def f_x(x):
        # exp(a E) = x**(-a) exp(a (E + log x)); the second factor is bounded at 0
        return x ** (-a) * np.exp(a * expint_log_part(x) - x)

    if not substitute:
        return f_x

    def f_u(u):
        x = u * u
        return 2.0 * u ** (1.0 - 2.0 * a) * np.exp(a * expint_log_part(x) - x)

    return f_u


def _gauss_panels(f, lo: float, hi: float, panels: int, nodes: int) -> float:
    t, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * t[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return math.fsum((half[:, None] * w[None, :] * vals).ravel())


def exp_weight_integral(a: float, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """``integral_0^inf exp(a E(x) - x) dx`` for ``a`` in ``[-1, 1/2]``.

    The range is cut at ``spec.upper``; beyond it the integrand is below
    ``exp(|a| E(upper)) exp(-x)`` and that tail bound is added to the error.
    """
    spec = spec or QuadratureSpec()
    f = _exp_weight_integrand(a, spec.substitute)
    hi = math.sqrt(spec.upper) if spec.substitute else spec.upper
    # x = 0 is never evaluated: Gauss nodes are interior
    tail = math.exp(abs(a) * expint_E(spec.upper)) * math.exp(-spec.upper)
    panels = spec.initial_panels
    prev = _gauss_panels(f, 0.0, hi, panels, spec.nodes)
    history = [prev]
    while panels < spec.max_panels:
        panels *= 2
        cur = _gauss_panels(f, 0.0, hi, panels, spec.nodes)
        history.append(cur)
        # floor at a few ulps: successive estimates can agree to the last bit
        err = abs(cur - prev) + tail + 8 * math.ulp(cur)
        if err < spec.tol:
            return QuadratureResult(cur, err, panels)
        prev = cur
    raise QuadratureError(
        f"a={a}: tolerance {spec.tol:g} not reached with {panels} panels; "
        f"last estimates {history[-3:]}, substitution={'on' if spec.substitute else 'off'}"
    )


def longest_constant(spec: QuadratureSpec | None = None, halved: bool = True) -> QuadratureResult:
    """``integral_0^inf exp(-E(x)/2 - x) dx`` (about 0.7578).

    With ``halved=False`` the exponent is ``-E(x)`` and the result is the
    permutation constant (about 0.6243).
    """
    return exp_weight_integral(-0.5 if halved else -1.0, spec)


def shortest_constant(spec: QuadratureSpec | None = None) -> QuadratureResult:
    """``(sqrt(pi)/2) integral_0^inf exp(E(x)/2 - x) dx`` (about 1.4572)."""
    raw = exp_weight_integral(0.5, spec)
    scale = 0.5 * math.sqrt(math.pi)
    return QuadratureResult(scale * raw.value, scale * raw.error, raw.panels)


@dataclass(frozen=True)
class Constants:
    gamma: float
    longest_cyc: float
    shortest_cyc: float
    longest_perm: float
    shortest_perm_coeff: float
    errors: dict

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "longest_cyc": self.longest_cyc,
            "shortest_cyc": self.shortest_cyc,
            "longest_perm": self.longest_perm,
            "shortest_perm_coeff": self.shortest_perm_coeff,
            "errors": dict(self.errors),
        }


def constants(spec: QuadratureSpec | None = None) -> Constants:
    lc = longest_constant(spec)
    sc = shortest_constant(spec)
    lp = longest_constant(spec, halved=False)
    return Constants(
        gamma=EULER_GAMMA,
        longest_cyc=lc.value,
        shortest_cyc=sc.value,
        longest_perm=lp.value,
        shortest_perm_coeff=math.exp(-EULER_GAMMA),
        errors={
            "gamma": 5e-21,
            "longest_cyc": lc.error,
            "shortest_cyc": sc.error,
            "longest_perm": lp.error,
            "shortest_perm_coeff": 1e-16,
        },
    )


class Harmonic(NamedTuple):
    exact: Fraction
    value: float


def harmonic(n: int) -> Harmonic:
    """``H_n = 1 + 1/2 + ... + 1/n`` as an exact rational and a float."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    h = sum((Fraction(1, m) for m in range(1, n + 1)), Fraction(0))
    return Harmonic(h, float(h))


def harmonic_float(n: int) -> float:
    """Float ``H_n`` without building the exact rational (for large ``n``)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.fsum(1.0 / m for m in range(1, n + 1))
