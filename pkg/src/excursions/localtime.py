"""Inverse local time at 0: Bernstein function, Levy density, Krein measure."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diffusion import (
    DiffusionModel,
    OrnsteinUhlenbeck,
    ReflectedBrownianMotion,
    SpectralTruncation,
    _check_positive,
    _out,
    log_sinh,
)
from .numerics import (
    DomainError,
    QuadOutcome,
    binom_half,
    binom_half_table,
    gamma_ln,
    gamma_ratio_half,
    integrate,
)

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _unsupported(model):
    return NotImplementedError(f"no closed form for model {type(model).__name__}")


# ---------------------------------------------------------------------------
# Bernstein function and Green value


def _phi(model: DiffusionModel, lam):
    """Phi with the convention Phi(0) = 0; lam >= 0 assumed."""
    lam = np.asarray(lam, dtype=float)
    if isinstance(model, OrnsteinUhlenbeck):
        g = model.gamma
        pos = np.where(lam > 0, lam, 1.0)
        x = pos / (2 * g)
        tiny = x < 1e-8
        xs = np.where(tiny, x, 1.0)
        xr = np.where(tiny, 1.0, x)
        # 1 / Gamma(x) = x (1 + euler_gamma x) + O(x^3); multiplying lam last keeps subnormal lam nonzero
        small = np.where(tiny, pos, 0.0) * np.exp(gamma_ln(xs + 0.5)) / math.sqrt(g) * (1.0 + np.euler_gamma * xs)
        regular = 2.0 * math.sqrt(g) * gamma_ratio_half(xr)
        return _out(np.where(lam > 0, np.where(tiny, small, regular), 0.0))
    if isinstance(model, ReflectedBrownianMotion):
        return _out(np.sqrt(2.0 * lam))
    raise _unsupported(model)


def phi(model: DiffusionModel, lam):
    """Laplace exponent of the inverse local time at 0.

    OU: 2 sqrt(gamma) Gamma((lam + gamma) / 2 gamma) / Gamma(lam / 2 gamma);
    reflected BM: sqrt(2 lam).
    """
    return _phi(model, _check_positive("lambda", lam))


def r00(model: DiffusionModel, lam):
    """Green value R_lam(0, 0) = 1 / Phi(lam)."""
    return _out(1.0 / np.asarray(phi(model, lam)))


def r00_quadrature(model: DiffusionModel, lam: float, tol: float = 1e-12) -> QuadOutcome:
    """R_lam(0, 0) as the Laplace transform of p(t; 0, 0), by quadrature.

    For lam < 1 the tolerance is relative to the scale 1 / lam of the result.
    """
    lam = float(_check_positive("lambda", lam))
    f = lambda t: math.exp(-lam * t) * model.p00(t)
    scale = max(1.0, 1.0 / lam)
    parts = [integrate(f, 0.0, 1.0, tol / 4, singular="lower")]
    # decade panels up to the decay scale 1 / lam, then t = t0 + s / lam
    t0 = 1.0
    while t0 * lam < 1.0:
        parts.append(integrate(f, t0, 10.0 * t0, tol * scale / 40))
        t0 *= 10.0
    g = lambda s: math.exp(-lam * t0 - s) * model.p00(t0 + s / lam)
    tail = integrate(g, 0.0, np.inf, tol * lam * scale / 4)
    parts.append(QuadOutcome(tail.value / lam, tail.abs_error_estimate / lam, tail.converged))
    return QuadOutcome(sum(p.value for p in parts), sum(p.abs_error_estimate for p in parts),
                       all(p.converged for p in parts))


# ---------------------------------------------------------------------------
# Levy density


def nu(model: DiffusionModel, t):
    """Density of the Levy measure of the inverse local time at 0."""
    t = _check_positive("t", t)
    if isinstance(model, OrnsteinUhlenbeck):
        g = model.gamma
        gt = g * t
        lognu = 1.5 * math.log(g) + 0.5 * gt - 0.5 * math.log(2 * math.pi) - 1.5 * log_sinh(gt)
        return _out(np.exp(lognu))
    if isinstance(model, ReflectedBrownianMotion):
        return _out(t ** -1.5 / math.sqrt(2 * math.pi))
    raise _unsupported(model)


def nu_tail(model: DiffusionModel, u):
    """Levy tail int_u^inf nu = n(zeta > u)."""
    u = _check_positive("u", u)
    if isinstance(model, OrnsteinUhlenbeck):
        g = model.gamma
        with np.errstate(over="ignore"):
            return _out(2.0 * math.sqrt(g / math.pi) / np.sqrt(np.expm1(2.0 * g * u)))
    if isinstance(model, ReflectedBrownianMotion):
        return _out(np.sqrt(2.0 / (math.pi * u)))
    raise _unsupported(model)


def nu_spectral(model: OrnsteinUhlenbeck, t, n_terms: int = 60, tol: float = 1e-10) -> QuadOutcome:
    """nu(t) from its exponential series (MacLaurin expansion of (1 - x)^{-3/2})."""
    if not isinstance(model, OrnsteinUhlenbeck):
        raise NotImplementedError("spectral series available for the OU model only")
    t = float(_check_positive("t", t))
    g = model.gamma
    ts = g * t
    n = np.arange(n_terms)
    terms = binom_half_table(n_terms) * np.exp(-(2 * n + 1) * ts)
    scale = g ** 1.5 * _TWO_OVER_SQRT_PI
    trunc = SpectralTruncation.for_time(ts, n_terms)
    err = scale * trunc.tail_bound
    return QuadOutcome(scale * float(terms.sum()), err, err <= tol)


def subordinator_laplace(model: DiffusionModel, ell: float, lam: float) -> float:
    """E_0 exp(-lam tau_ell) = exp(-ell Phi(lam))."""
    if ell < 0:
        raise DomainError("local time level must be >= 0")
    return math.exp(-ell * float(phi(model, lam)))


def levy_khintchine_exponent(model: DiffusionModel, lam: float, tol: float = 1e-12) -> QuadOutcome:
    """int (1 - e^{-lam v}) nu(v) dv by quadrature (independent of phi)."""
    lam = float(_check_positive("lambda", lam))
    f = lambda v: -math.expm1(-lam * v) * nu(model, v)
    head = integrate(f, 0.0, 1.0, tol / 2, singular="lower")
    tail = integrate(f, 1.0, np.inf, tol / 2)
    return QuadOutcome(head.value + tail.value,
                       head.abs_error_estimate + tail.abs_error_estimate,
                       head.converged and tail.converged)


# ---------------------------------------------------------------------------
# mixing measures


@dataclass(frozen=True)
class MixingMeasure:
    """A measure on (0, inf): finitely many atoms or a density.

    A truncated atomic measure may carry smooth extensions
    ``atom_location(x)`` / ``atom_weight(x)`` of its atoms as functions of
    a continuous index; integrals then add the omitted tail as
    int_{N - 1/2}^inf (midpoint comparison), which handles the slowly
    converging sums met here.
    """

    kind: str
    locations: np.ndarray | None = None
    weights: np.ndarray | None = None
    density: Callable | None = None
    atom_location: Callable | None = None
    atom_weight: Callable | None = None

    def __post_init__(self):
        if self.kind == "atomic":
            loc = np.asarray(self.locations, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if loc.shape != w.shape or loc.ndim != 1:
                raise DomainError("atoms need matching 1-d locations and weights")
            if np.any(loc <= 0) or np.any(np.diff(loc) <= 0):
                raise DomainError("atom locations must be positive and strictly increasing")
            if np.any(w <= 0):
                raise DomainError("atom weights must be positive")
        elif self.kind == "density":
            if self.density is None:
                raise DomainError("density measure needs a density")
        else:
            raise DomainError(f"unknown measure kind {self.kind!r}")

    @property
    def n_atoms(self) -> int:
        return 0 if self.locations is None else len(self.locations)

    def integrate(self, f: Callable, tol: float = 1e-12, tail: bool = True) -> QuadOutcome:
        """int f(z) M(dz); f must accept numpy arrays."""
        if self.kind == "atomic":
            total = float(np.sum(f(self.locations) * self.weights))
            if not tail or self.atom_weight is None:
                return QuadOutcome(total, 0.0, True)
            start = self.n_atoms - 0.5
            g = lambda x: f(self.atom_location(x)) * self.atom_weight(x)
            # x = start / u^2 maps power-law tails x^{-p}, p > 1, to bounded integrands on (0, 1]
            rest = integrate(lambda u: g(start / (u * u)) * 2.0 * start / u ** 3, 0.0, 1.0, tol=tol)
            # midpoint comparison error ~ |g'(N)| / 24, bounded by the tail's own size scale
            slack = abs(float(g(self.n_atoms + 1.0) - g(float(self.n_atoms)))) / 24.0
            return QuadOutcome(total + rest.value, rest.abs_error_estimate + slack, rest.converged)
        h = lambda z: f(z) * self.density(z)
        head = integrate(h, 0.0, 1.0, tol / 2, singular="lower")
        rest = integrate(h, 1.0, np.inf, tol / 2)
        return QuadOutcome(head.value + rest.value,
                           head.abs_error_estimate + rest.abs_error_estimate,
                           head.converged and rest.converged)

    def laplace(self, t: float, tol: float = 1e-12) -> QuadOutcome:
        return self.integrate(lambda z: np.exp(-t * z), tol=tol)

    def mass(self, tol: float = 1e-12) -> QuadOutcome:
        return self.integrate(lambda z: np.ones_like(np.asarray(z, dtype=float)), tol=tol)

    def krein_conditions(self) -> tuple[bool, bool]:
        """(int M(dz)/(z(z+1)) finite, int M(dz)/z divergent)."""
        finite = self.integrate(lambda z: 1.0 / (z * (z + 1.0)), tol=1e-10)
        integrable = finite.converged and np.isfinite(finite.value)
        # log-slope of the integrand of M(dz)/z at infinity, per unit index or unit z
        if self.kind == "atomic":
            if self.atom_weight is None:
                return integrable, False
            x1, x2 = 1e6, 1e7
            h = lambda x: self.atom_weight(x) / self.atom_location(x)
        else:
            x1, x2 = 1e6, 1e7
            h = lambda z: self.density(z) / z
        slope = math.log(float(h(x2)) / float(h(x1))) / math.log(x2 / x1)
        return integrable, slope >= -1.0


def _ou_atom_weight(gamma: float):
    scale = _TWO_OVER_SQRT_PI * gamma ** 1.5
    return lambda x: scale * binom_half(x)


def krein_measure(model: DiffusionModel, n_atoms: int = 10_000) -> MixingMeasure:
    """Measure M with nu(t) = int e^{-tz} M(dz).

    OU: atoms at gamma (2n + 1) with weights (2/sqrt(pi)) gamma^{3/2} C(n+1/2, n),
    truncated after n_atoms with a smooth tail extension. BM: density
    sqrt(2 z) / pi.
    """
    if isinstance(model, OrnsteinUhlenbeck):
        g = model.gamma
        n = np.arange(n_atoms, dtype=float)
        return MixingMeasure(
            kind="atomic",
            locations=g * (2 * n + 1),
            weights=_TWO_OVER_SQRT_PI * g ** 1.5 * binom_half_table(n_atoms),
            atom_location=lambda x: g * (2 * np.asarray(x) + 1),
            atom_weight=_ou_atom_weight(g),
        )
    if isinstance(model, ReflectedBrownianMotion):
        return MixingMeasure(kind="density", density=lambda z: np.sqrt(2.0 * np.asarray(z)) / math.pi)
    raise _unsupported(model)


def krein_mass_identity(model: DiffusionModel, alpha: float, n_atoms: int = 10_000) -> QuadOutcome:
    """int M(dz) / (z (z + alpha)); equals Phi(alpha) / alpha.

    BM has the closed form sqrt(2 / alpha).
    """
    alpha = float(_check_positive("alpha", alpha))
    if isinstance(model, ReflectedBrownianMotion):
        return QuadOutcome(math.sqrt(2.0 / alpha), 0.0, True)
    M = krein_measure(model, n_atoms)
    return M.integrate(lambda z: 1.0 / (z * (z + alpha)))


@dataclass(frozen=True)
class LevyCharacteristics:
    """Bundle of the inverse-local-time characteristics of a model."""

    model: DiffusionModel
    krein: MixingMeasure

    @classmethod
    def of(cls, model: DiffusionModel, n_atoms: int = 10_000) -> "LevyCharacteristics":
        return cls(model, krein_measure(model, n_atoms))

    def nu(self, t):
        return nu(self.model, t)

    def nu_tail(self, u):
        return nu_tail(self.model, u)

    def phi(self, lam):
        return phi(self.model, lam)

    def r00(self, lam):
        return r00(self.model, lam)
