"""Identity battery: each check compares two independent evaluations of one quantity."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .diffusion import DiffusionModel, OrnsteinUhlenbeck, f_hit_spectral, phat_spectral
from .localtime import (
    krein_mass_identity,
    krein_measure,
    levy_khintchine_exponent,
    nu,
    nu_spectral,
    nu_tail,
    phi,
    r00_quadrature,
)
from .numerics import NonConvergenceError, QuadOutcome, integrate
from .straddle import (
    StationarityUnavailable,
    StraddleLaw,
    b_averaged_rhs,
    bismut_length_functional,
    length_convolution_rhs,
    stationary_delta_density,
)

PASSED, FAILED, UNAVAILABLE, NONCONVERGED = "passed", "failed", "unavailable", "nonconverged"


def describe(model: DiffusionModel) -> str:
    if isinstance(model, OrnsteinUhlenbeck):
        return f"ou(gamma={model.gamma:g})"
    return model.name


@dataclass
class CheckReport:
    """One comparison; passes iff |lhs - rhs| <= tolerance * max(1, |rhs|) and quadrature converged."""

    check_id: str
    inputs: dict
    lhs: float
    rhs: float
    tolerance: float
    status: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASSED

    @classmethod
    def compare(cls, check_id, inputs, lhs, rhs, tolerance, detail=""):
        """Build a report from plain numbers or QuadOutcome values."""
        converged = all(getattr(v, "converged", True) for v in (lhs, rhs))
        lv, rv = float(lhs), float(rhs)
        if not converged:
            status = NONCONVERGED
        elif abs(lv - rv) <= tolerance * max(1.0, abs(rv)):
            status = PASSED
        else:
            status = FAILED
        return cls(check_id, inputs, lv, rv, tolerance, status, detail)

    @classmethod
    def unavailable(cls, check_id, inputs, reason):
        return cls(check_id, inputs, math.nan, math.nan, math.nan, UNAVAILABLE, reason)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("lhs", "rhs", "tolerance"):
            if not math.isfinite(d[key]):
                d[key] = None
        return d


@dataclass
class SuiteReport:
    reports: list = field(default_factory=list)

    def extend(self, items):
        self.reports.extend(items)

    def count(self, status: str) -> int:
        return sum(r.status == status for r in self.reports)

    @property
    def ok(self) -> bool:
        return self.count(FAILED) == 0 and self.count(NONCONVERGED) == 0

    def exit_code(self) -> int:
        if self.count(FAILED):
            return 1
        if self.count(NONCONVERGED):
            return 3
        return 0

    def to_dict(self) -> dict:
        counts = {s: self.count(s) for s in (PASSED, FAILED, UNAVAILABLE, NONCONVERGED)}
        return {"summary": counts, "reports": [r.to_dict() for r in self.reports]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _guard(check_id, inputs, thunk, tolerance):
    try:
        return thunk()
    except NonConvergenceError as exc:
        return CheckReport(check_id, inputs, math.nan, math.nan, tolerance, NONCONVERGED, str(exc))


# ---------------------------------------------------------------------------


def check_last_zero(model: DiffusionModel, t: float, tolerance: float = 1e-6) -> CheckReport:
    """int_0^t p(u; 0, 0) n(zeta > t - u) du = 1: the last zero before t exists."""
    f = lambda u: model.p00(u) * nu_tail(model, t - u) if 0 < u < t else 0.0
    lhs = integrate(f, 0.0, t, tol=1e-10, singular="both")
    return CheckReport.compare(f"last_zero[{describe(model)},t={t:g}]", {"t": t}, lhs, 1.0, tolerance)


def check_last_exit_mass(model: DiffusionModel, alpha: float, tolerance: float = 1e-6) -> CheckReport:
    """int e^{-alpha u} p00 du * int (1 - e^{-alpha v}) nu dv = 1, both by quadrature."""
    green = r00_quadrature(model, alpha)
    expo = levy_khintchine_exponent(model, alpha)
    lhs = QuadOutcome(green.value * expo.value,
                      green.abs_error_estimate * expo.value + expo.abs_error_estimate * green.value,
                      green.converged and expo.converged)
    return CheckReport.compare(f"last_exit_mass[{describe(model)},alpha={alpha:g}]",
                               {"alpha": alpha}, lhs, 1.0, tolerance)


def check_bernstein(model: DiffusionModel, alpha: float, tolerance: float = 1e-8) -> CheckReport:
    """Phi(alpha) R_alpha(0, 0) = 1 with R from quadrature of p00."""
    green = r00_quadrature(model, alpha)
    lhs = QuadOutcome(float(phi(model, alpha)) * green.value, green.abs_error_estimate, green.converged)
    return CheckReport.compare(f"bernstein[{describe(model)},alpha={alpha:g}]",
                               {"alpha": alpha}, lhs, 1.0, tolerance)


CONVOLUTION_GRID = (0.25, 0.5, 1.0)


def check_length_convolution_grid(model: DiffusionModel, tolerance: float = 1e-6, nu_scale: float = 1.0) -> list[CheckReport]:
    """nu(u + v) against int m(dy) f_{y0}(u) f_{y0}(v) on a 3 x 3 grid.

    nu_scale multiplies the closed-form side; it exists to prove the check can fail.
    """
    out = []
    for u in CONVOLUTION_GRID:
        for v in CONVOLUTION_GRID:
            lhs = nu_scale * float(nu(model, u + v))
            out.append(CheckReport.compare(f"length_convolution[{describe(model)},u={u:g},v={v:g}]",
                                           {"u": u, "v": v}, lhs, length_convolution_rhs(model, u, v), tolerance))
    return out


def check_b_independence(model: DiffusionModel, a: float = 1.0, tolerance: float = 1e-6) -> list[CheckReport]:
    """int m(dy) f_{y0}(b) f_{y0}(a - b) does not depend on b, nor does its b-average."""
    target = float(nu(model, a))
    out = [CheckReport.compare(f"b_split[{describe(model)},a={a:g},b={frac:g}a]",
                               {"a": a, "b": frac * a}, length_convolution_rhs(model, frac * a, (1 - frac) * a), target, tolerance)
           for frac in (0.1, 0.5, 0.9)]
    out.append(CheckReport.compare(f"b_average[{describe(model)},a={a:g}]", {"a": a},
                                   b_averaged_rhs(model, a), target, tolerance))
    return out


def check_krein(model: DiffusionModel, n_atoms: int = 10_000) -> list[CheckReport]:
    """Laplace reconstruction of nu from M, and int M(dz) / (z (z + alpha)) = Phi(alpha) / alpha."""
    M = krein_measure(model, n_atoms)
    name = describe(model)
    out = [CheckReport.compare(f"krein_laplace[{name},t={t:g}]", {"t": t},
                               M.laplace(t), float(nu(model, t)), 1e-8)
           for t in (0.5, 1.0, 2.0)]
    mass_tol = 1e-3 if isinstance(model, OrnsteinUhlenbeck) else 1e-10
    out += [CheckReport.compare(f"krein_mass[{name},alpha={al:g}]", {"alpha": al},
                                krein_mass_identity(model, al, n_atoms), float(phi(model, al)) / al, mass_tol)
            for al in (0.5, 1.0, 2.0)]
    return out


def check_spectral(model: DiffusionModel, n_terms: int = 100, tolerance: float = 1e-8) -> list[CheckReport]:
    """Closed forms against truncated eigenfunction series (OU only)."""
    name = describe(model)
    if not isinstance(model, OrnsteinUhlenbeck):
        return [CheckReport.unavailable(f"spectral[{name}]", {}, "no discrete spectrum")]
    times = (0.5, 1.0, 2.0)
    out = []
    for t in times:
        for x in (0.5, 1.0, 2.0):
            out.append(CheckReport.compare(f"spectral_f_hit[{name},x={x:g},t={t:g}]", {"x": x, "t": t},
                                           f_hit_spectral(model, x, t, n_terms), model.f_hit(x, t), tolerance))
        for x, y in ((0.5, 0.5), (0.5, 1.0), (1.0, 1.0)):
            out.append(CheckReport.compare(f"spectral_phat[{name},t={t:g},x={x:g},y={y:g}]",
                                           {"t": t, "x": x, "y": y},
                                           phat_spectral(model, t, x, y, n_terms), model.phat(t, x, y), tolerance))
        out.append(CheckReport.compare(f"spectral_nu[{name},t={t:g}]", {"t": t},
                                       nu_spectral(model, t, n_terms), float(nu(model, t)), tolerance))
    return out


def _half_line(f, tol=1e-11):
    head = integrate(f, 0.0, 1.0, tol / 2, singular="lower")
    rest = integrate(f, 1.0, np.inf, tol / 2)
    return QuadOutcome(head.value + rest.value, head.abs_error_estimate + rest.abs_error_estimate,
                       head.converged and rest.converged)


def check_straddle_consistency(model: DiffusionModel, alpha: float) -> list[CheckReport]:
    law = StraddleLaw(model, alpha)
    name = f"{describe(model)},alpha={alpha:g}"
    out = []
    for a in (0.5, 1.0, 2.0):
        cid = f"gamma2_mixture[{name},a={a:g}]"
        out.append(_guard(cid, {"a": a},
                          lambda: CheckReport.compare(cid, {"a": a}, law.mixture_gamma2(a), law.density_delta(a), 1e-6),
                          1e-6))
    for g in (0.5, 1.0, 2.0):
        out.append(CheckReport.compare(f"laplace_delta[{name},g={g:g}]", {"g": g},
                                       law.laplace_delta_quadrature(g), law.laplace_delta(g), 1e-6))
    grid = (0.0, 0.25, 0.5, 1.0, 2.0)
    worst = max(abs(law.laplace_gd(g1, g2) - law.laplace_gd(g1 + g2, 0.0) * law.laplace_delta(g2))
                for g1 in grid for g2 in grid)
    out.append(CheckReport.compare(f"independence[{name}]", {"grid": list(grid)}, worst, 0.0, 1e-12,
                                   "max over the grid of |joint - product|"))
    for label, dens in (("delta", law.density_delta), ("t_minus_g", law.density_t_minus_g),
                        ("g", law.density_g)):
        out.append(CheckReport.compare(f"normalization_{label}[{name}]", {}, _half_line(dens), 1.0, 1e-6))
    mass_tol = 1e-3 if isinstance(model, OrnsteinUhlenbeck) else 1e-10
    out.append(CheckReport.compare(f"mixture_mass[{name}]", {}, law.mixture_exponential().mass(), 1.0, mass_tol))
    return out


def check_stationary(model: DiffusionModel, alpha_small: float = 1e-4, tolerance: float = 1e-3) -> list[CheckReport]:
    """alpha -> 0 limits of the straddle laws against the stationary laws."""
    name = describe(model)
    if not math.isfinite(model.m_total):
        return [CheckReport.unavailable(f"stationary[{name}]", {}, "infinite speed measure")]
    law = StraddleLaw(model, alpha_small)
    out = [CheckReport.compare(f"stationary_delta[{name},a={a:g}]", {"a": a, "alpha": alpha_small},
                               law.density_delta(a), stationary_delta_density(model, a), tolerance)
           for a in (0.5, 1.0, 2.0)]
    out += [CheckReport.compare(f"stationary_uniform[{name},u={u:g},a=1]", {"u": u, "alpha": alpha_small},
                                law.cond_tg_given_delta(u, 1.0), 1.0, tolerance)
            for u in (0.1, 0.5, 0.9)]
    green = r00_quadrature(model, alpha_small)
    lhs = QuadOutcome(alpha_small * green.value, alpha_small * green.abs_error_estimate, green.converged)
    out.append(CheckReport.compare(f"stationary_green[{name}]", {"alpha": alpha_small},
                                   lhs, 1.0 / model.m_total, tolerance))
    return out


def check_bismut(model: DiffusionModel, tolerance: float = 1e-6) -> list[CheckReport]:
    """Length functionals of the excursion measure against the stationary straddle law."""
    name = describe(model)
    if not math.isfinite(model.m_total):
        return [CheckReport.unavailable(f"bismut[{name}]", {}, "infinite speed measure")]
    cases = (("a", lambda a: a, None),
             ("indicator_a_gt_1", lambda a: float(a > 1.0), [1.0]),
             ("one_minus_exp", lambda a: -math.expm1(-a), None))
    out = []
    for label, f, pts in cases:
        try:
            lhs, rhs = bismut_length_functional(model, f, points=pts)
        except StationarityUnavailable as exc:
            out.append(CheckReport.unavailable(f"bismut_{label}[{name}]", {}, str(exc)))
            continue
        out.append(CheckReport.compare(f"bismut_{label}[{name}]", {}, lhs, rhs, tolerance))
    return out


def run_all(models, alphas=(1.0,), corrupt_tolerance: bool = False) -> SuiteReport:
    """Every check for every model (and every alpha where one applies).

    corrupt_tolerance replaces every tolerance by -1 so that nothing can
    pass; it exists to exercise the failure path end to end.
    """
    suite = SuiteReport()
    for model in models:
        for t in (0.3, 1.0, 3.0):
            suite.extend([check_last_zero(model, t)])
        for al in alphas:
            suite.extend([check_last_exit_mass(model, al), check_bernstein(model, al)])
        suite.extend(check_length_convolution_grid(model))
        suite.extend(check_b_independence(model))
        suite.extend(check_krein(model))
        suite.extend(check_spectral(model))
        for al in alphas:
            suite.extend(check_straddle_consistency(model, al))
        suite.extend(check_stationary(model))
        suite.extend(check_bismut(model))
    if corrupt_tolerance:
        for r in suite.reports:
            if r.status in (PASSED, FAILED):
                r.tolerance = -1.0
                r.status = FAILED
    return suite
