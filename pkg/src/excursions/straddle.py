"""Laws of the excursion straddling an independent exponential time T.

With T ~ Exp(alpha) independent of X started at 0, G_T is the last zero
before T, D_T the first zero after T and Delta_T = D_T - G_T. Everything is
expressed through the Levy density nu of the inverse local time and its
Laplace exponent Phi. The stationary (alpha -> 0) limits for models with a
finite speed measure live here as well.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Callable

import numpy as np

from .diffusion import DiffusionModel, _out
from .localtime import (
    LevyCharacteristics,
    MixingMeasure,
    _phi,
    nu,
    nu_tail,
    phi,
)
from .numerics import (
    DomainError,
    NonConvergenceError,
    QuadOutcome,
    TabulatedIntegral,
    gauss_legendre,
    integrate,
)


class StationarityUnavailable(ValueError):
    """The model has infinite speed measure, so no stationary law exists."""


def _pos(name, value):
    arr = np.asarray(value, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return arr


def _sum(*parts: QuadOutcome) -> QuadOutcome:
    return QuadOutcome(sum(p.value for p in parts),
                       sum(p.abs_error_estimate for p in parts),
                       all(p.converged for p in parts))


def _half_line(f, tol, points=None) -> QuadOutcome:
    """int_0^inf f with sqrt substitution at 0, split at 1."""
    return _sum(integrate(f, 0.0, 1.0, tol / 2, singular="lower"),
                integrate(f, 1.0, np.inf, tol / 2, points=points))


class StraddleLaw:
    """Joint and marginal laws of (G_T, D_T) for one model and rate alpha."""

    def __init__(self, model: DiffusionModel, alpha: float, n_atoms: int = 10_000):
        if not (np.isfinite(alpha) and alpha > 0):
            raise DomainError(f"alpha must be > 0, got {alpha!r}")
        self.model = model
        self.alpha = float(alpha)
        self.n_atoms = n_atoms
        self.phi_alpha = float(phi(model, self.alpha))

    def __repr__(self):
        return f"StraddleLaw({self.model!r}, alpha={self.alpha})"

    @cached_property
    def levy(self) -> LevyCharacteristics:
        return LevyCharacteristics.of(self.model, self.n_atoms)

    # -- densities -----------------------------------------------------------

    def density_delta(self, a):
        """Density of Delta_T: (1 - e^{-alpha a}) nu(a) / Phi(alpha)."""
        a = _pos("a", a)
        return _out(-np.expm1(-self.alpha * a) * nu(self.model, a) / self.phi_alpha)

    def density_t_minus_g(self, u):
        """Density of T - G_T: (alpha / Phi(alpha)) e^{-alpha u} int_u^inf nu."""
        u = _pos("u", u)
        return _out(self.alpha / self.phi_alpha * np.exp(-self.alpha * u) * nu_tail(self.model, u))

    def density_d_minus_t(self, v, tol: float = 1e-12):
        """Density of D_T - T by quadrature of e^{-alpha z} nu(z) over (v, inf).

        Uses z = v + w^2, which keeps the integrand bounded and strips the
        e^{alpha v} prefactor. ``tol`` is relative once the density exceeds one.
        """
        v = _pos("v", v)
        out = np.empty(v.shape)
        for idx, vv in np.ndenumerate(v):
            vv = float(vv)
            f = lambda w: 2.0 * w * math.exp(-self.alpha * w * w) * nu(self.model, vv + w * w)
            # the integral grows like v^{-1/2} as v -> 0: scale the tolerance with it
            q = integrate(f, 0.0, np.inf, tol=tol * max(1.0, vv ** -0.5), points=[math.sqrt(vv)])
            if not q.converged:
                raise NonConvergenceError(
                    f"D_T - T density at v={vv}: error {q.abs_error_estimate:.3g} above {tol:.3g}")
            out[idx] = self.alpha / self.phi_alpha * q.value
        return _out(out)

    def density_d_minus_t_mixture(self, v):
        """Same density through the exponential mixture int z e^{-zv} Mhat(dz)."""
        v = float(_pos("v", v))
        q = self.mixture_exponential().integrate(lambda z: z * np.exp(-z * v))
        return q.value

    def joint_tg_dt(self, u, v):
        """Joint density of (T - G_T, D_T - T): alpha e^{-alpha u} nu(u + v) / Phi(alpha)."""
        u = _pos("u", u)
        v = _pos("v", v)
        return _out(self.alpha * np.exp(-self.alpha * u) * nu(self.model, u + v) / self.phi_alpha)

    def density_g(self, u):
        """Density of G_T: Phi(alpha) e^{-alpha u} p(u; 0, 0)."""
        u = _pos("u", u)
        return _out(self.phi_alpha * np.exp(-self.alpha * u) * self.model.p00(u))

    def joint_tg_delta(self, u, a):
        """Joint density of (T - G_T, Delta_T); zero when u > a."""
        u = _pos("u", u)
        a = _pos("a", a)
        val = self.alpha / self.phi_alpha * np.exp(-self.alpha * u) * nu(self.model, a)
        return _out(np.where(u <= a, val, 0.0))

    def cond_tg_given_delta(self, u, a):
        """Density of T - G_T given Delta_T = a: exponential(alpha) truncated to (0, a]."""
        u = _pos("u", u)
        a = _pos("a", a)
        val = self.alpha * np.exp(-self.alpha * u) / -np.expm1(-self.alpha * a)
        return _out(np.where(u <= a, val, 0.0))

    # -- transforms ----------------------------------------------------------

    def laplace_gd(self, g1, g2) -> float:
        """E exp(-g1 G_T - g2 D_T) = (Phi(g2 + alpha) - Phi(g2)) / Phi(g1 + g2 + alpha)."""
        if g1 < 0 or g2 < 0:
            raise DomainError("Laplace arguments must be >= 0")
        m, a = self.model, self.alpha
        return float((_phi(m, g2 + a) - _phi(m, g2)) / _phi(m, g1 + g2 + a))

    def laplace_delta(self, g) -> float:
        """E exp(-g Delta_T) = (Phi(g + alpha) - Phi(g)) / Phi(alpha)."""
        if g < 0:
            raise DomainError("Laplace argument must be >= 0")
        m, a = self.model, self.alpha
        return float((_phi(m, g + a) - _phi(m, g)) / self.phi_alpha)

    def laplace_delta_quadrature(self, g: float, tol: float = 1e-12) -> QuadOutcome:
        return _half_line(lambda a: math.exp(-g * a) * self.density_delta(a), tol)

    # -- distribution functions ---------------------------------------------

    def _table_limit(self) -> float:
        return 40.0 / self.alpha

    # Past the table every factor e^{-alpha x} is below e^{-40}. The
    # survival of Delta_T is then nu_tail / Phi, and those of T - G_T and
    # G_T are bounded by their densities over alpha, all to double precision.

    @cached_property
    def _cdf_delta(self):
        return TabulatedIntegral(self.density_delta, x_max=self._table_limit(), total=1.0,
                                 survival=lambda a: nu_tail(self.model, a) / self.phi_alpha)

    @cached_property
    def _cdf_t_minus_g(self):
        return TabulatedIntegral(self.density_t_minus_g, x_max=self._table_limit(), total=1.0,
                                 survival=lambda u: self.density_t_minus_g(u) / self.alpha)

    @cached_property
    def _cdf_g(self):
        return TabulatedIntegral(self.density_g, x_max=self._table_limit(), total=1.0,
                                 survival=lambda u: self.density_g(u) / self.alpha)

    def cdf_delta(self, a):
        """P(Delta_T <= a)."""
        return _out(self._cdf_delta(a))

    def cdf_t_minus_g(self, u):
        return _out(self._cdf_t_minus_g(u))

    def cdf_g(self, u):
        return _out(self._cdf_g(u))

    def cdf_delta_quadrature(self, a: float, tol: float = 1e-12) -> QuadOutcome:
        """P(Delta_T <= a) by adaptive quadrature (slow reference route)."""
        if a <= 0:
            return QuadOutcome(0.0, 0.0, True)
        return integrate(self.density_delta, 0.0, a, tol, singular="lower")

    # -- infinite divisibility ----------------------------------------------

    def mixture_exponential(self) -> MixingMeasure:
        """Mhat_alpha(dz) = (alpha / Phi(alpha)) M(dz) / (z (alpha + z)).

        T - G_T has density int (alpha + z) e^{-(alpha + z) u} Mhat(dz), a
        mixture of exponentials.
        """
        return _reweight(self.levy.krein, lambda z: self.alpha / self.phi_alpha / (z * (self.alpha + z)))

    def mixture_gamma2(self, a, order: int = 40) -> float:
        """Density of Delta_T as a mixture of Gamma(2) laws.

        Evaluates int Mhat(dz) int x^2 a e^{-xa} Pi_{z}(dx) with
        Pi_z(dx) = (z (alpha + z) / alpha) x^{-2} dx on (z, z + alpha); the
        inner integral is a Gauss-Legendre rule on that interval.
        """
        a = float(_pos("a", a))
        alpha = self.alpha
        nodes, weights = gauss_legendre(order)

        def inner(z):
            z = np.asarray(z, dtype=float)
            x = z[..., None] + alpha * nodes
            gamma2 = x * x * a * np.exp(-x * a)
            pi_density = (z * (alpha + z) / alpha)[..., None] / (x * x)
            return alpha * ((gamma2 * pi_density) @ weights)

        q = self.mixture_exponential().integrate(inner)
        if not q.converged:
            raise NonConvergenceError(f"Gamma(2) mixture at a={a} did not converge")
        return q.value


def _reweight(measure: MixingMeasure, h: Callable) -> MixingMeasure:
    if measure.kind == "atomic":
        loc = measure.atom_location
        w = measure.atom_weight
        return MixingMeasure(
            kind="atomic",
            locations=measure.locations,
            weights=measure.weights * h(measure.locations),
            atom_location=loc,
            atom_weight=lambda x: w(x) * h(loc(x)),
        )
    dens = measure.density
    return MixingMeasure(kind="density", density=lambda z: dens(z) * h(np.asarray(z, dtype=float)))


# ---------------------------------------------------------------------------
# identities through the hitting densities


def _model_of(obj) -> DiffusionModel:
    return obj.model if isinstance(obj, StraddleLaw) else obj


def length_convolution_rhs(model: DiffusionModel, u: float, v: float, tol: float = 1e-12) -> QuadOutcome:
    """int m(dy) f_{y0}(u) f_{y0}(v) by quadrature."""
    model = _model_of(model)
    u = float(_pos("u", u))
    v = float(_pos("v", v))
    f = lambda y: model.speed_density(y) * model.f_hit(y, u) * model.f_hit(y, v) if y > 0 else 0.0
    pts = sorted({math.sqrt(min(u, v)), math.sqrt(max(u, v))})
    return integrate(f, 0.0, np.inf, tol=tol, points=pts)


def identity_length_convolution(model: DiffusionModel, u: float, v: float) -> tuple[float, float]:
    """(nu(u + v), int m(dy) f_{y0}(u) f_{y0}(v)); accepts a model or a StraddleLaw."""
    model = _model_of(model)
    rhs = length_convolution_rhs(model, u, v)
    if not rhs.converged:
        raise NonConvergenceError(f"hitting-density product integral at ({u}, {v}) did not converge")
    return float(nu(model, u + v)), rhs.value


def b_averaged_rhs(model: DiffusionModel, a: float, tol: float = 1e-9) -> QuadOutcome:
    """int m(dy) int_0^a (db / a) f_{y0}(b) f_{y0}(a - b); equals nu(a)."""
    model = _model_of(model)
    a = float(_pos("a", a))
    f = lambda b: length_convolution_rhs(model, b, a - b).value / a
    return integrate(f, 0.0, a, tol=tol)


# ---------------------------------------------------------------------------
# stationary laws


def _m_total(model: DiffusionModel) -> float:
    m = model.m_total
    if not np.isfinite(m):
        raise StationarityUnavailable(f"{type(model).__name__} has infinite speed measure")
    return m


def stationary_delta_density(model: DiffusionModel, a):
    """Density a nu(a) / m(R+) of the excursion length straddling a fixed time."""
    m = _m_total(model)
    a = _pos("a", a)
    return _out(a * nu(model, a) / m)


def stationary_g_density(model: DiffusionModel, u):
    """Density of t - G_t (and of D_t - t) in the stationary regime."""
    m = _m_total(model)
    return _out(nu_tail(model, _pos("u", u)) / m)


def stationary_joint(model: DiffusionModel, u, v):
    m = _m_total(model)
    return _out(nu(model, _pos("u", u) + _pos("v", v)) / m)


def bismut_length_functional(model: DiffusionModel, f: Callable[[float], float],
                             points=None, tol: float = 1e-11) -> tuple[QuadOutcome, QuadOutcome]:
    """Both sides of n(f(zeta)) = m(R+) E[f(Delta) / Delta] (stationary Delta).

    f must make f(a) nu(a) integrable, i.e. vanish like a^{1/2 + eps} at 0.
    """
    m = _m_total(model)
    lhs = _half_line(lambda a: f(a) * nu(model, a), tol, points)
    rhs_inner = _half_line(lambda a: f(a) / a * stationary_delta_density(model, a), tol, points)
    rhs = QuadOutcome(m * rhs_inner.value, m * rhs_inner.abs_error_estimate, rhs_inner.converged)
    return lhs, rhs


def straddle_alpha_limit(model: DiffusionModel, a, alpha_small: float):
    """density_delta at a small alpha, to be compared with the stationary law."""
    if not 0 < alpha_small <= 0.01:
        raise DomainError("alpha_small must lie in (0, 0.01]")
    _m_total(model)
    return StraddleLaw(model, alpha_small).density_delta(a)
