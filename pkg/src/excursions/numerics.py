"""Special functions, quadrature, series summation and seeded random streams."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special
from scipy import integrate as _spi


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class NonConvergenceError(RuntimeError):
    """A quadrature or series did not reach its tolerance."""


@dataclass(frozen=True)
class QuadOutcome:
    value: float
    abs_error_estimate: float
    converged: bool

    def __float__(self) -> float:
        return float(self.value)


# ---------------------------------------------------------------------------
# special functions

_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_lngamma(x):
    # valid for x >= 0.5
    z = x - 1.0
    acc = np.full_like(z, _LANCZOS_COEF[0])
    for i in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def gamma_ln(x):
    """log Gamma(x) for real x > 0 (Lanczos, reflection below 1/2).

    Accepts scalars or arrays; raises DomainError on non-positive or
    non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"gamma_ln requires finite x > 0, got {x!r}")
    flat = np.atleast_1d(arr)
    small = flat < 0.5
    out = np.empty_like(flat)
    out[~small] = _lanczos_lngamma(flat[~small])
    if np.any(small):
        xs = flat[small]
        out[small] = math.log(math.pi) - np.log(np.sin(np.pi * xs)) - _lanczos_lngamma(1.0 - xs)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


_SQRT_PI_HALF = 0.5 * math.sqrt(math.pi)


def gamma_ratio_half(z):
    """Gamma(z + 1/2) / Gamma(z) for z > 0.

    Below z = 150 this is the ratio of scipy Gamma values; above, the
    asymptotic expansion in 1/z, whose truncation error is below 1e-18
    there. Differences of log-gammas would lose digits at large z.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("gamma_ratio_half requires z > 0")
    big = arr >= 150.0
    zb = np.where(big, arr, 1.0)
    zs = np.where(big, 1.0, arr)
    r = 1.0 / zb
    poly = (1.0 + r * (-1.0 / 8 + r * (1.0 / 128 + r * (5.0 / 1024 + r * (-21.0 / 32768
            + r * (-399.0 / 262144 + r * 869.0 / 4194304))))))
    out = np.where(big, np.sqrt(zb) * poly, special.gamma(zs + 0.5) / special.gamma(zs))
    return float(out) if out.ndim == 0 else out


def binom_half(n):
    """C(n + 1/2, n) = Gamma(n + 3/2) / (Gamma(n + 1) Gamma(3/2))."""
    arr = np.asarray(n, dtype=float)
    if np.any(arr < 0):
        raise DomainError("binom_half requires n >= 0")
    return gamma_ratio_half(arr + 1.0) / _SQRT_PI_HALF


def binom_half_table(n_terms: int) -> np.ndarray:
    """C(k + 1/2, k) for k = 0..n_terms-1 by the ratio recurrence."""
    if n_terms < 1:
        return np.zeros(0)
    k = np.arange(1, n_terms, dtype=float)
    return np.concatenate(([1.0], np.cumprod((k + 0.5) / k)))


def laguerre_half(n: int, x):
    """Generalized Laguerre polynomial L_n^(1/2)(x) via the three-term recurrence."""
    if n < 0:
        raise DomainError("laguerre_half requires n >= 0")
    return laguerre_half_all(n + 1, x)[n]


def laguerre_half_all(n_terms: int, x) -> np.ndarray:
    """Stack of L_k^(1/2)(x) for k = 0..n_terms-1, shape (n_terms, *x.shape)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_terms,) + x.shape)
    if n_terms == 0:
        return out
    out[0] = 1.0
    if n_terms == 1:
        return out
    out[1] = 1.5 - x
    for k in range(1, n_terms - 1):
        out[k + 1] = ((2 * k + 1.5 - x) * out[k] - (k + 0.5) * out[k - 1]) / (k + 1)
    return out


# ---------------------------------------------------------------------------
# quadrature


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    singular: str | None = None,
    points=None,
    limit: int = 400,
) -> QuadOutcome:
    """Adaptive quadrature of f over (a, b), b may be +inf.

    ``singular`` marks inverse-square-root endpoint behaviour at "lower",
    "upper" or "both" ends; the integral is then taken in s with
    x = a + s**2 (resp. b - s**2), which makes such integrands bounded.
    Semi-infinite ranges go through QUADPACK's tail transform.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if not (b > a):
        if b == a:
            return QuadOutcome(0.0, 0.0, True)
        raise DomainError(f"integration bounds must satisfy a < b (got {a}, {b})")

    if singular == "both":
        if not np.isfinite(b):
            raise DomainError("singular='both' needs a finite upper limit")
        mid = 0.5 * (a + b)
        left = integrate(f, a, mid, tol / 2, "lower", limit=limit)
        right = integrate(f, mid, b, tol / 2, "upper", limit=limit)
        return QuadOutcome(left.value + right.value,
                           left.abs_error_estimate + right.abs_error_estimate,
                           left.converged and right.converged)
    if singular == "lower":
        upper = math.sqrt(b - a) if np.isfinite(b) else np.inf
        g = lambda s: 2.0 * s * f(a + s * s)
        pts = None if points is None else [math.sqrt(p - a) for p in points if a < p < b]
        return _quad(g, 0.0, upper, tol, pts, limit)
    if singular == "upper":
        g = lambda s: 2.0 * s * f(b - s * s)
        pts = None if points is None else [math.sqrt(b - p) for p in points if a < p < b]
        return _quad(g, 0.0, math.sqrt(b - a), tol, pts, limit)
    if singular is not None:
        raise DomainError(f"unknown singular flag {singular!r}")
    return _quad(f, a, b, tol, points, limit)


def _quad(f, a, b, tol, points, limit) -> QuadOutcome:
    kwargs = dict(epsabs=tol, epsrel=0.0, limit=limit, full_output=1)
    if points and np.isfinite(b):
        kwargs["points"] = sorted(points)
    elif points:
        # QUADPACK ignores breakpoints on infinite ranges: split manually
        cut = max(points)
        head = _quad(f, a, cut, tol / 2, [p for p in points if p < cut], limit)
        tail = _quad(f, cut, b, tol / 2, None, limit)
        return QuadOutcome(head.value + tail.value,
                           head.abs_error_estimate + tail.abs_error_estimate,
                           head.converged and tail.converged)
    res = _spi.quad(lambda x: float(f(x)), a, b, **kwargs)
    value, err = res[0], res[1]
    ier_ok = len(res) == 3
    converged = bool(ier_ok and np.isfinite(value) and err <= tol)
    return QuadOutcome(float(value), float(err), converged)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


class TabulatedIntegral:
    """Fast vectorised F(x) = int_0^x f for a density f on (0, inf).

    Works in s = sqrt(x) so that x^{-1/2} behaviour at the origin is
    harmless: panel integrals are precomputed with Gauss-Legendre, a query
    adds one more Gauss-Legendre rule on its partial panel. Queries beyond
    the table use ``survival(x)`` when given, else adaptive quadrature of
    the tail.
    """

    def __init__(self, f, x_max: float = 60.0, n_panels: int = 600, order: int = 20,
                 total: float | None = None, survival=None):
        self.f = f
        self.survival = survival
        self.x_max = float(x_max)
        self.s_edges = np.linspace(0.0, math.sqrt(self.x_max), n_panels + 1)
        self.nodes, self.weights = gauss_legendre(order)
        lo, hi = self.s_edges[:-1], self.s_edges[1:]
        panel = self._panel(lo, hi)
        self.cumulative = np.concatenate(([0.0], np.cumsum(panel)))
        if total is None:
            tail = integrate(f, self.x_max, np.inf, tol=1e-13)
            total = self.cumulative[-1] + tail.value
        self.total = float(total)

    def _panel(self, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        h = hi - lo
        s = lo[..., None] + h[..., None] * self.nodes
        vals = 2.0 * s * self.f(s * s)
        vals = np.where(s > 0, vals, 0.0)
        return h * (vals @ self.weights)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        flat = x.ravel()
        res = out.ravel()
        inside = (flat > 0) & (flat <= self.x_max)
        res[flat <= 0] = 0.0
        if np.any(inside):
            s = np.sqrt(flat[inside])
            k = np.clip(np.searchsorted(self.s_edges, s, side="right") - 1, 0, len(self.s_edges) - 2)
            res[inside] = self.cumulative[k] + self._panel(self.s_edges[k], s)
        beyond = flat > self.x_max
        if self.survival is not None and np.any(beyond):
            res[beyond] = self.total - np.asarray(self.survival(flat[beyond]), dtype=float)
        else:
            for i in np.nonzero(beyond)[0]:
                res[i] = self.total - integrate(self.f, flat[i], np.inf, tol=1e-13).value
        return out


# ---------------------------------------------------------------------------
# series


def sum_tail(
    term: Callable[[int], float],
    tol: float,
    max_terms: int,
    ratio: float | None = None,
    power: float | None = None,
    start: int = 0,
) -> QuadOutcome:
    """Sum term(n) for n >= start with an envelope-based tail bound.

    The caller declares one envelope for the eventual terms: geometric,
    |t(n+1)| <= ratio * |t(n)| with ratio < 1, or power,
    |t(n)| <= C n^{-power} with power > 1. Summation stops once the tail
    bound implied by the envelope at the current term is below ``tol``.
    A violated envelope or an exhausted budget gives converged=False.
    """
    if (ratio is None) == (power is None):
        raise DomainError("declare exactly one of ratio= or power=")
    if ratio is not None and not 0 < ratio < 1:
        raise DomainError("geometric ratio must lie in (0, 1)")
    if power is not None and power <= 1:
        raise DomainError("power envelope needs power > 1")

    total = 0.0
    prev = None
    envelope_ok = True
    bound = math.inf
    for n in range(start, start + max_terms):
        t = float(term(n))
        total += t
        if ratio is not None:
            if prev is not None and abs(t) > ratio * abs(prev) * (1 + 1e-12) + 1e-300:
                envelope_ok = False
            bound = abs(t) * ratio / (1.0 - ratio)
        else:
            if n >= 1:
                bound = abs(t) * n / (power - 1.0)
        prev = t
        if envelope_ok and bound <= tol:
            return QuadOutcome(total, bound, True)
    return QuadOutcome(total, bound, False)


# ---------------------------------------------------------------------------
# random streams


@dataclass
class RandomStream:
    """Seeded, splittable source of draws.

    Streams with the same (seed, stream_id) replay the same sequence;
    distinct stream ids get independent PCG64 states spawned from the seed.
    A stream belongs to one consumer at a time.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(int(self.seed) & 0xFFFFFFFFFFFFFFFF,
                                    spawn_key=(int(self.stream_id),))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def draw_uniform(self, size=None):
        # open interval (0, 1): midpoints of a 2^53 lattice
        k = self._gen.integers(0, 1 << 53, size=size, dtype=np.int64)
        return (k + 0.5) * (1.0 / (1 << 53))

    def draw_normal(self, size=None):
        return self._gen.standard_normal(size)

    def draw_exponential(self, rate: float = 1.0, size=None):
        if rate <= 0:
            raise DomainError("exponential rate must be positive")
        return self._gen.standard_exponential(size) / rate

    def draw_arcsine(self, size=None):
        u = self.draw_uniform(size)
        return np.sin(0.5 * np.pi * u) ** 2
