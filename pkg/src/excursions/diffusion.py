"""Reflected linear diffusions on [0, inf): Ornstein-Uhlenbeck and Brownian motion.

Densities are taken with respect to the speed measure m(dy) = m'(y) dy,
normalised so that the generator is (d/dm)(d/dS).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .numerics import (
    DomainError,
    QuadOutcome,
    binom_half,
    laguerre_half_all,
)

_LOG_2PI = math.log(2.0 * math.pi)
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _check_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return arr


def _check_nonnegative(name, value):
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def log_sinh(u):
    """log(sinh(u)) for u > 0 without overflow or underflow."""
    u = np.asarray(u, dtype=float)
    return u + np.log(-np.expm1(-2.0 * u)) - math.log(2.0)


class DiffusionModel:
    """Common interface of the reflected diffusions."""

    name: str = "diffusion"

    @property
    def m_total(self) -> float:
        raise NotImplementedError

    def scale(self, x):
        raise NotImplementedError

    def speed_density(self, x):
        raise NotImplementedError

    def drift(self, x):
        raise NotImplementedError

    def p00(self, t):
        raise NotImplementedError

    def phat(self, t, x, y):
        raise NotImplementedError

    def f_hit(self, x, t):
        raise NotImplementedError

    def upward_drift(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class OrnsteinUhlenbeck(DiffusionModel):
    """|U| for dU = dB - gamma U dt, reflected at 0.

    m(dx) = 2 exp(-gamma x^2) dx and S(x) = int_0^x exp(gamma y^2) dy.
    """

    gamma: float = 1.0
    name = "ou"

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")

    @property
    def m_total(self) -> float:
        return math.sqrt(math.pi / self.gamma)

    def scale(self, x):
        x = _check_nonnegative("x", x)
        g = self.gamma
        rg = math.sqrt(g)
        with np.errstate(over="ignore"):
            out = np.exp(g * x * x) * special.dawsn(rg * x) / rg
        return _out(out)

    def speed_density(self, x):
        x = np.asarray(x, dtype=float)
        return _out(2.0 * np.exp(-self.gamma * x * x))

    def drift(self, x):
        return _out(-self.gamma * np.asarray(x, dtype=float))

    def p00(self, t):
        t = _check_positive("t", t)
        g = self.gamma
        return _out(np.sqrt(g / (math.pi * -np.expm1(-2.0 * g * t))))

    def log_phat(self, t, x, y):
        t = _check_positive("t", t)
        x = _check_positive("x", x)
        y = _check_positive("y", y)
        g = self.gamma
        gt = g * t
        with np.errstate(over="ignore"):
            quad_term = g * (x * x + y * y) / np.expm1(2.0 * gt)
        coupling = 2.0 * g * x * y * np.exp(-gt) / -np.expm1(-2.0 * gt)
        return (0.5 * math.log(g) + 0.5 * gt - 0.5 * _LOG_2PI - 0.5 * log_sinh(gt)
                - quad_term + log_sinh(coupling))

    def phat(self, t, x, y):
        return _out(np.exp(self.log_phat(t, x, y)))

    def f_hit(self, x, t):
        x = _check_positive("x", x)
        t = _check_positive("t", t)
        g = self.gamma
        gt = g * t
        with np.errstate(over="ignore"):
            quad_term = g * x * x / np.expm1(2.0 * gt)
        logf = (1.5 * math.log(g) + np.log(x) + 0.5 * gt - 0.5 * _LOG_2PI
                - 1.5 * log_sinh(gt) - quad_term)
        return _out(np.exp(logf))

    def upward_drift(self, x):
        x = _check_positive("x", x)
        rg = math.sqrt(self.gamma)
        # e^{g x^2} / S(x) = sqrt(g) / dawsn(sqrt(g) x)
        return _out(-self.gamma * x + rg / special.dawsn(rg * x))

    def upward_drift_remainder(self, x):
        """upward_drift(x) - 1/x, smooth at 0."""
        x = np.asarray(x, dtype=float)
        rg = math.sqrt(self.gamma)
        z = rg * x
        small = z < 1e-2
        zs = np.where(small, z, 1.0)
        zb = np.where(small, 1.0, z)
        series = 2.0 * zs / 3.0 + 8.0 * zs ** 3 / 45.0
        direct = 1.0 / special.dawsn(zb) - 1.0 / zb
        return _out(-self.gamma * x + rg * np.where(small, series, direct))


@dataclass(frozen=True)
class ReflectedBrownianMotion(DiffusionModel):
    """|B| with m(dx) = 2 dx and S(x) = x."""

    name = "bm"

    @property
    def m_total(self) -> float:
        return math.inf

    def scale(self, x):
        return _out(_check_nonnegative("x", x))

    def speed_density(self, x):
        return _out(np.full_like(np.asarray(x, dtype=float), 2.0))

    def drift(self, x):
        return _out(np.zeros_like(np.asarray(x, dtype=float)))

    def p00(self, t):
        t = _check_positive("t", t)
        return _out(1.0 / np.sqrt(2.0 * math.pi * t))

    def phat(self, t, x, y):
        t = _check_positive("t", t)
        x = _check_positive("x", x)
        y = _check_positive("y", y)
        gauss = np.exp(-(x - y) ** 2 / (2.0 * t)) / np.sqrt(2.0 * math.pi * t)
        return _out(0.5 * gauss * -np.expm1(-2.0 * x * y / t))

    def f_hit(self, x, t):
        x = _check_positive("x", x)
        t = _check_positive("t", t)
        return _out(x * np.exp(-x * x / (2.0 * t)) / np.sqrt(2.0 * math.pi * t ** 3))

    def upward_drift(self, x):
        return _out(1.0 / _check_positive("x", x))

    def upward_drift_remainder(self, x):
        return _out(np.zeros_like(np.asarray(x, dtype=float)))


def scale_S(model: DiffusionModel, x):
    return model.scale(x)


def speed_total(model: DiffusionModel) -> float:
    return model.m_total


def p00(model: DiffusionModel, t):
    return model.p00(t)


def phat(model: DiffusionModel, t, x, y):
    return model.phat(t, x, y)


def f_hit(model: DiffusionModel, x, t):
    return model.f_hit(x, t)


def upward_drift(model: DiffusionModel, x):
    """Drift of the killed diffusion conditioned never to hit 0 (h = S)."""
    return model.upward_drift(x)


def excursion_fdd_density(model: DiffusionModel, times, points) -> float:
    """Excursion-measure density of (e_{t1}, ..., e_{tn}) w.r.t. prod m(dx_i).

    f_{x1,0}(t1) * prod phat(t_{i+1} - t_i; x_i, x_{i+1}); n = 1 is the
    entrance law.
    """
    times = np.asarray(times, dtype=float)
    points = np.asarray(points, dtype=float)
    if times.ndim != 1 or times.shape != points.shape or times.size == 0:
        raise DomainError("times and points must be 1-d arrays of equal, positive length")
    if times[0] <= 0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must be strictly increasing and positive")
    dens = model.f_hit(points[0], times[0])
    for i in range(len(times) - 1):
        dens *= model.phat(times[i + 1] - times[i], points[i], points[i + 1])
    return float(dens)


# ---------------------------------------------------------------------------
# spectral expansions (OU, stated for gamma = 1 and rescaled)


@dataclass(frozen=True)
class SpectralTruncation:
    """Truncation of sum_n C(n+1/2, n) e^{-(2n+1)t} after n_terms terms.

    tail_bound dominates the omitted part through the geometric envelope
    with ratio e^{-2t} (N + 3/2) / (N + 1).
    """

    n_terms: int
    tail_bound: float

    @classmethod
    def for_time(cls, t: float, n_terms: int) -> "SpectralTruncation":
        if n_terms < 1:
            raise DomainError("n_terms must be >= 1")
        n = n_terms
        q = math.exp(-2.0 * t) * (n + 1.5) / (n + 1.0)
        if q >= 1.0:
            return cls(n_terms, math.inf)
        lead = float(binom_half(n)) * math.exp(-(2 * n + 1) * t)
        return cls(n_terms, lead / (1.0 - q))


def _require_ou(model):
    if not isinstance(model, OrnsteinUhlenbeck):
        raise NotImplementedError("spectral expansions are available for the OU model only")


def f_hit_spectral(model: OrnsteinUhlenbeck, x, t, n_terms: int = 100, tol: float = 1e-10) -> QuadOutcome:
    """First-hitting density of 0 from its Laguerre expansion."""
    _require_ou(model)
    x = float(_check_nonnegative("x", x))
    t = float(_check_positive("t", t))
    g = model.gamma
    xs, ts = x * math.sqrt(g), g * t
    lag = laguerre_half_all(n_terms, xs * xs)
    decay = np.exp(-(2 * np.arange(n_terms) + 1) * ts)
    value = g * _TWO_OVER_SQRT_PI * xs * float(decay @ lag)
    trunc = SpectralTruncation.for_time(ts, n_terms)
    # |L_n^(1/2)(z)| <= C(n+1/2, n) e^{z/2}
    err = g * _TWO_OVER_SQRT_PI * xs * math.exp(0.5 * xs * xs) * trunc.tail_bound
    return QuadOutcome(value, err, err <= tol)


def phat_spectral(model: OrnsteinUhlenbeck, t, x, y, n_terms: int = 100, tol: float = 1e-10) -> QuadOutcome:
    """Killed transition density from its Laguerre expansion."""
    _require_ou(model)
    t = float(_check_positive("t", t))
    x = float(_check_nonnegative("x", x))
    y = float(_check_nonnegative("y", y))
    g = model.gamma
    rg = math.sqrt(g)
    xs, ys, ts = x * rg, y * rg, g * t
    n = np.arange(n_terms)
    inv_norm = _TWO_OVER_SQRT_PI / binom_half(n)
    lx = laguerre_half_all(n_terms, xs * xs)
    ly = laguerre_half_all(n_terms, ys * ys)
    terms = inv_norm * np.exp(-(2 * n + 1) * ts) * xs * lx * ys * ly
    value = rg * float(terms.sum())
    trunc = SpectralTruncation.for_time(ts, n_terms)
    err = rg * _TWO_OVER_SQRT_PI * xs * ys * math.exp(0.5 * (xs * xs + ys * ys)) * trunc.tail_bound
    return QuadOutcome(value, err, err <= tol)
