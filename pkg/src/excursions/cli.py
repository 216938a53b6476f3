"""Command-line front end: ``python -m excursions {eval,verify,mc,krein}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or domain
error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .diffusion import OrnsteinUhlenbeck, ReflectedBrownianMotion
from .localtime import krein_measure, nu, nu_tail, phi
from .montecarlo import (
    BudgetExceeded,
    count_excursion_maxima,
    ks_statistic,
    sample_straddle_euler,
    sample_straddle_exact,
    simulate_reflected_euler,
    williams_durations,
)
from .numerics import DomainError, NonConvergenceError
from .straddle import StationarityUnavailable, StraddleLaw, stationary_delta_density
from .verify import run_all

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3

FORMULAS = {
    "nu": ("t", "Levy density of inverse local time: OU gamma^(3/2) e^(gamma t/2) / (sqrt(2 pi) sinh(gamma t)^(3/2)); BM t^(-3/2)/sqrt(2 pi)"),
    "nu_tail": ("t", "Levy tail n(zeta > t): OU 2 sqrt(gamma/pi) (e^(2 gamma t) - 1)^(-1/2); BM sqrt(2/(pi t))"),
    "phi": ("lambda", "Laplace exponent: OU 2 sqrt(gamma) Gamma((lambda+gamma)/(2 gamma)) / Gamma(lambda/(2 gamma)); BM sqrt(2 lambda)"),
    "p00": ("t", "p(t;0,0) w.r.t. speed measure: OU sqrt(gamma/(pi (1 - e^(-2 gamma t)))); BM 1/sqrt(2 pi t)"),
    "phat": ("t", "killed transition density phat(t;x,y) w.r.t. speed measure"),
    "f_hit": ("t", "first-hitting density of 0 from x"),
    "delta": ("a", "density of Delta_T: (1 - e^(-alpha a)) nu(a) / Phi(alpha)"),
    "t_minus_g": ("u", "density of T - G_T: alpha e^(-alpha u) n(zeta > u) / Phi(alpha)"),
    "d_minus_t": ("v", "density of D_T - T: (alpha/Phi(alpha)) e^(alpha v) int_v^inf e^(-alpha z) nu(z) dz"),
    "g": ("u", "density of G_T: Phi(alpha) e^(-alpha u) p(u;0,0)"),
    "joint": ("u", "joint density of (T - G_T, D_T - T) at (u, v): alpha e^(-alpha u) nu(u+v) / Phi(alpha)"),
    "stationary_delta": ("a", "stationary straddle length density a nu(a) / m(R+)"),
}

EXPERIMENTS = ("straddle_exact", "straddle_euler", "excursion_max", "williams")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def _model(args):
    if args.model == "bm":
        return ReflectedBrownianMotion()
    return OrnsteinUhlenbeck(args.gamma)


def _sim_gamma(args) -> float:
    return 0.0 if args.model == "bm" else args.gamma


def _grid(args) -> np.ndarray:
    start, stop, step = args.grid
    if not (step > 0 and start < stop):
        raise UsageError("grid needs start < stop and step > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _threads_default() -> int:
    raw = os.environ.get("EXCURSIONS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _provenance(args, command: str, extra: dict | None = None) -> dict:
    prov = {"tool": f"excursions {__version__}", "command": command, "model": args.model}
    if args.model == "ou":
        prov["gamma"] = args.gamma
    prov["alpha"] = args.alpha
    if getattr(args, "seed", None) is not None:
        prov["seed"] = args.seed
    if extra:
        prov.update(extra)
    return prov


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _emit(args, provenance: dict, columns: list[str], rows: list[list], extra: dict | None = None):
    if args.format == "json":
        body = {"provenance": provenance, "columns": columns,
                "rows": [[_json_num(v) for v in row] for row in rows]}
        if extra:
            body.update(extra)
        text = json.dumps(body, indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        for key, val in provenance.items():
            buf.write(f"# {key}: {_fmt(val)}\n")
        if extra:
            for key, val in extra.items():
                buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_num(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    quantity = args.quantity
    model = _model(args)
    var, formula = FORMULAS[quantity]
    grid = _grid(args)
    law = None
    if quantity in ("delta", "t_minus_g", "d_minus_t", "g", "joint"):
        law = StraddleLaw(model, args.alpha)

    def value(p):
        if quantity == "nu":
            return nu(model, p)
        if quantity == "nu_tail":
            return nu_tail(model, p)
        if quantity == "phi":
            return phi(model, p)
        if quantity == "p00":
            return model.p00(p)
        if quantity == "phat":
            return model.phat(p, args.x, args.y)
        if quantity == "f_hit":
            return model.f_hit(args.x, p)
        if quantity == "delta":
            return law.density_delta(p)
        if quantity == "t_minus_g":
            return law.density_t_minus_g(p)
        if quantity == "d_minus_t":
            return law.density_d_minus_t(p)
        if quantity == "g":
            return law.density_g(p)
        if quantity == "joint":
            return law.joint_tg_dt(p, args.v)
        return stationary_delta_density(model, p)

    rows = []
    for k, p in enumerate(grid):
        try:
            rows.append([float(p), float(value(float(p)))])
        except (DomainError, StationarityUnavailable) as exc:
            raise DomainError(f"row {k} ({var}={p:g}): {exc}") from exc
    extra = {"formula": formula, "grid": list(args.grid)}
    if quantity in ("phat", "f_hit"):
        extra["x"] = args.x
    if quantity == "phat":
        extra["y"] = args.y
    if quantity == "joint":
        extra["v"] = args.v
    _emit(args, _provenance(args, f"eval {quantity}", extra), [var, quantity], rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = run_all([_model(args)], [args.alpha], corrupt_tolerance=args.corrupt_tolerance)
    rows = [[r.check_id, r.status, r.lhs, r.rhs, r.tolerance] for r in suite.reports]
    summary = suite.to_dict()["summary"]
    prov = _provenance(args, "verify", {"formula": "each check compares two independent evaluations"})
    _emit(args, prov, ["check_id", "status", "lhs", "rhs", "tolerance"], rows, {"summary": summary})
    return suite.exit_code()


def _straddle_rows(batch, law):
    rows = []
    summary = batch.summary()
    cdfs = {"delta": law.cdf_delta, "t_minus_g": law.cdf_t_minus_g, "g": law.cdf_g}
    for name in ("g", "t_minus_g", "d_minus_t", "delta"):
        s = summary[name]
        ks = ks_statistic(getattr(batch, name), cdfs[name]) if name in cdfs else math.nan
        rows.append([name, s["mean"], s["std"], s["median"], ks])
    return rows


def cmd_mc(args) -> int:
    exp = args.experiment
    gamma = _sim_gamma(args)
    model = _model(args)
    workers = args.threads
    base = {"samples": args.samples, "streams": args.streams}
    if exp == "straddle_exact":
        batch = sample_straddle_exact(gamma, args.alpha, args.samples, args.seed,
                                      n_streams=args.streams, workers=workers)
        rows = _straddle_rows(batch, StraddleLaw(model, args.alpha))
        prov = _provenance(args, "mc straddle_exact",
                           {**base, "formula": "T ~ Exp(alpha); Brownian time change s = (e^(2 gamma T) - 1)/(2 gamma); last zero s*Arcsine"})
        _emit(args, prov, ["variable", "mean", "std", "median", "ks_vs_analytic"], rows)
        return EXIT_OK
    if exp == "straddle_euler":
        batch = sample_straddle_euler(gamma, args.alpha, args.samples, args.dt, args.seed,
                                      n_streams=args.streams, workers=workers)
        rows = _straddle_rows(batch, StraddleLaw(model, args.alpha))
        prov = _provenance(args, "mc straddle_euler",
                           {**base, "dt": args.dt, "formula": "X <- |X - gamma X dt + sqrt(dt) Z|; zero band 2 sqrt(dt)"})
        _emit(args, prov, ["variable", "mean", "std", "median", "ks_vs_analytic"], rows)
        return EXIT_OK
    if exp == "excursion_max":
        per_path = args.horizon / args.paths
        # occupation band: 0.05, widened to the smallest admissible 2 sqrt(dt) on coarse grids
        band = max(0.05, 2.0 * math.sqrt(args.dt))
        path = simulate_reflected_euler(gamma, args.dt, per_path, args.seed, n_paths=args.paths,
                                        record_stride=max(1, int(round(per_path / args.dt))),
                                        bands=(band,), excursion_threshold=args.level,
                                        finish_level=args.level)
        est = count_excursion_maxima(path, args.level)
        target = 1.0 / float(model.scale(args.level))
        prov = _provenance(args, "mc excursion_max",
                           {"dt": args.dt, "horizon": args.horizon, "paths": args.paths, "level": args.level,
                            "band": band,
                            "formula": "excursions with max >= a per unit local time vs n(M >= a) = 1/S(a)"})
        rows = [[args.level, est, target, est / target - 1.0]]
        _emit(args, prov, ["level", "estimate", "one_over_scale", "relative_error"], rows)
        return EXIT_OK
    durations = williams_durations(gamma, args.level, args.samples, dt=args.dt, seed=args.seed)
    prov = _provenance(args, "mc williams",
                       {"samples": args.samples, "dt": args.dt, "level": args.level,
                        "formula": "two upward-conditioned paths from 1e-4 to level a, back to back"})
    se = float(durations.std(ddof=1) / math.sqrt(durations.size)) if durations.size > 1 else math.nan
    rows = [[args.level, float(durations.mean()), se, float(np.median(durations))]]
    _emit(args, prov, ["level", "mean_duration", "std_error", "median_duration"], rows)
    return EXIT_OK


def cmd_krein(args) -> int:
    model = _model(args)
    M = krein_measure(model)
    residual = abs(M.laplace(1.0).value - float(nu(model, 1.0)))
    extra = {"formula": "nu(t) = int e^(-t z) M(dz)", "reconstruction_residual_t1": residual}
    if M.kind == "atomic":
        k = min(args.n_atoms, M.n_atoms)
        rows = [[int(i), float(M.locations[i]), float(M.weights[i])] for i in range(k)]
        columns = ["index", "location", "weight"]
        extra["n_atoms"] = k
    else:
        grid = _grid(args)
        rows = [[float(z), float(M.density(z))] for z in grid]
        columns = ["z", "density"]
        extra["grid"] = list(args.grid)
    _emit(args, _provenance(args, "krein", extra), columns, rows)
    return EXIT_OK if residual <= 1e-8 else EXIT_NONCONVERGED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=("ou", "bm"), default="ou")
    common.add_argument("--gamma", type=float, default=1.0, help="OU mean-reversion rate")
    common.add_argument("--alpha", type=float, default=1.0, help="rate of the independent exponential time")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="excursions", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"excursions {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="tabulate a density on a grid")
    ev.add_argument("quantity", choices=sorted(FORMULAS))
    ev.add_argument("--grid", nargs=3, type=float, metavar=("START", "STOP", "STEP"), default=(0.5, 2.0, 0.5))
    ev.add_argument("--x", type=float, default=1.0, help="start point for phat and f_hit")
    ev.add_argument("--y", type=float, default=1.0, help="end point for phat")
    ev.add_argument("--v", type=float, default=0.5, help="second coordinate for joint")
    ev.set_defaults(run=cmd_eval)

    ve = sub.add_parser("verify", parents=[common], help="run the identity battery")
    ve.add_argument("--corrupt-tolerance", action="store_true", help=argparse.SUPPRESS)
    ve.set_defaults(run=cmd_verify)

    mc = sub.add_parser("mc", parents=[common], help="run a Monte Carlo experiment")
    mc.add_argument("experiment", choices=EXPERIMENTS)
    mc.add_argument("--samples", type=int, default=100_000)
    mc.add_argument("--dt", type=float, default=1e-4)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--streams", type=int, default=1, help="independent random streams (fixes the output)")
    mc.add_argument("--threads", type=int, default=_threads_default(),
                    help="worker threads (default $EXCURSIONS_THREADS or 1)")
    mc.add_argument("--level", type=float, default=1.0, help="excursion height a")
    mc.add_argument("--horizon", type=float, default=1e4, help="total simulated time for excursion_max")
    mc.add_argument("--paths", type=int, default=1000, help="parallel paths for excursion_max")
    mc.set_defaults(run=cmd_mc)

    kr = sub.add_parser("krein", parents=[common], help="dump the Krein measure")
    kr.add_argument("--n-atoms", type=int, default=10)
    kr.add_argument("--grid", nargs=3, type=float, metavar=("START", "STOP", "STEP"), default=(0.5, 5.0, 0.5))
    kr.set_defaults(run=cmd_krein)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (UsageError, DomainError, StationarityUnavailable, BudgetExceeded, NotImplementedError) as exc:
        print(f"excursions: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"excursions: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as exc:
        print(f"excursions: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
