"""Simulation routes for the reflected OU process (gamma = 0 gives reflected BM).

Two independent routes produce (G_T, D_T): an exact sampler built on the
time change that turns the OU process into a Brownian motion, and a
reflected Euler scheme. Long Euler runs also yield local-time estimates and
excursion maxima, and a pair of upward-conditioned paths reproduces an
excursion conditioned on its maximum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .diffusion import DiffusionModel, OrnsteinUhlenbeck, ReflectedBrownianMotion
from .numerics import DomainError, RandomStream


class BudgetExceeded(RuntimeError):
    """A simulation would exceed its step or memory budget."""


def model_for(gamma: float) -> DiffusionModel:
    """OU with the given gamma, or reflected BM when gamma == 0."""
    if gamma < 0 or not np.isfinite(gamma):
        raise DomainError(f"gamma must be >= 0, got {gamma!r}")
    return ReflectedBrownianMotion() if gamma == 0 else OrnsteinUhlenbeck(gamma)


def _split(n: int, n_streams: int) -> list[int]:
    if n < 1:
        raise DomainError("sample count must be >= 1")
    if n_streams < 1:
        raise DomainError("stream count must be >= 1")
    base, extra = divmod(n, n_streams)
    return [base + (k < extra) for k in range(n_streams)]


def _run_streams(job, sizes, seed, workers):
    """Run job(stream, size) per stream; results come back in stream order."""
    tasks = [(RandomStream(seed, k), m) for k, m in enumerate(sizes) if m > 0]
    if workers is None or workers <= 1 or len(tasks) == 1:
        return [job(s, m) for s, m in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sm: job(*sm), tasks))


# ---------------------------------------------------------------------------
# straddling excursion samples


@dataclass(frozen=True)
class McBatch:
    """Samples of the excursion straddling T ~ Exp(alpha)."""

    alpha: float
    gamma: float
    seed: int
    g: np.ndarray
    t_minus_g: np.ndarray
    d_minus_t: np.ndarray
    delta: np.ndarray
    method: str = "exact"

    @property
    def n(self) -> int:
        return len(self.g)

    @property
    def t(self) -> np.ndarray:
        return self.g + self.t_minus_g

    @classmethod
    def from_parts(cls, alpha, gamma, seed, method, parts):
        g, tg, dt = (np.concatenate([p[i] for p in parts]) for i in range(3))
        return cls(alpha, gamma, seed, g, tg, dt, tg + dt, method)

    def summary(self) -> dict:
        out = {}
        for name in ("g", "t_minus_g", "d_minus_t", "delta"):
            v = getattr(self, name)
            out[name] = {"mean": float(v.mean()), "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
                         "median": float(np.median(v))}
        return out


def _exact_chunk(gamma, alpha, joint):
    def job(stream: RandomStream, m: int):
        T = stream.draw_exponential(alpha, m)
        A = stream.draw_arcsine(m)
        if joint == "meander":
            # |beta_s| for a Brownian motion with last zero g = sA before s is
            # sqrt(s - g) times a Rayleigh variable; then d - s = beta_s^2 / Z^2
            spread = (1.0 - A) * 2.0 * stream.draw_exponential(1.0, m) / stream.draw_normal(m) ** 2
        else:
            # s / d ~ Arcsine independent of A: right marginals, wrong joint law
            A2 = stream.draw_arcsine(m)
            spread = (1.0 - A2) / A2
        if gamma == 0:
            return T - T * A, T * (1.0 - A), T * spread
        # with s = (e^{2gT} - 1) / 2g and the map x -> log(1 + 2gx) / 2g
        c = -np.expm1(-2.0 * gamma * T)
        t_minus_g = -np.log1p(-(1.0 - A) * c) / (2.0 * gamma)
        d_minus_t = np.log1p(c * spread) / (2.0 * gamma)
        return T - t_minus_g, t_minus_g, d_minus_t
    return job


def sample_straddle_exact(gamma: float, alpha: float, n: int, seed: int,
                          n_streams: int = 1, workers: int | None = None,
                          joint: str = "meander") -> McBatch:
    """Exact samples of (G_T, D_T) through the Brownian time change.

    The zeros of the OU process at time t are the zeros of a Brownian motion
    at s = (e^{2 gamma t} - 1) / (2 gamma). At s = s(T) the last Brownian
    zero is s * Arcsine and the first zero after s is s plus the hitting
    time of 0 from the meander endpoint. Output depends on (seed, n_streams)
    only, never on the number of worker threads.

    ``joint="independent"`` draws s / d as a second independent arcsine; it
    is kept to show that this shortcut breaks the law of Delta_T.
    """
    if not alpha > 0:
        raise DomainError("alpha must be > 0")
    model_for(gamma)
    if joint not in ("meander", "independent"):
        raise DomainError(f"unknown joint construction {joint!r}")
    parts = _run_streams(_exact_chunk(float(gamma), float(alpha), joint),
                         _split(n, n_streams), seed, workers)
    return McBatch.from_parts(alpha, gamma, seed, "exact", parts)


def _euler_chunk(gamma, alpha, dt, zero_band, time_cap, bridge):
    sqdt = math.sqrt(dt)
    max_steps = int(math.ceil(time_cap / dt))

    def job(stream: RandomStream, m: int):
        T = stream.draw_exponential(alpha, m)
        g = np.zeros(m)
        d = np.full(m, np.nan)
        x = np.zeros(m)
        active = np.arange(m)
        xa, Ta = x, T
        k = 0
        while active.size:
            k += 1
            if k > max_steps:
                # censored: the first zero after T lies beyond the cap
                d[active] = np.inf
                break
            prop = xa - gamma * xa * dt + sqdt * stream.draw_normal(active.size)
            zero = (prop < 0) | (np.abs(prop) < zero_band)
            if bridge:
                # a Brownian bridge between two positive states touches 0
                # with probability exp(-2 x y / dt)
                u = stream.draw_uniform(active.size)
                zero |= u < np.exp(-2.0 * xa * np.abs(prop) / dt)
            xa = np.abs(prop)
            t = k * dt
            before = t <= Ta
            g[active[zero & before]] = t
            hit = zero & ~before
            if hit.any():
                d[active[hit]] = t
                keep = ~hit
                active, xa, Ta = active[keep], xa[keep], Ta[keep]
        return g, T - g, d - T
    return job


def sample_straddle_euler(gamma: float, alpha: float, n: int, dt: float, seed: int,
                          zero_band: float | None = None, n_streams: int = 1,
                          workers: int | None = None, time_cap: float | None = None,
                          bridge: bool = False) -> McBatch:
    """(G_T, D_T) read off reflected Euler paths started at 0.

    A step counts as a visit to 0 when the Euler proposal is reflected or
    the new state lies below zero_band (default 2 sqrt(dt)). Paths run at
    most to time_cap (default 100 / alpha + 100); a path with no zero after
    T by then gets D_T = inf. BM needs the cap: D_T - T has an infinite mean.
    With bridge=True a step also counts as a visit to 0 with the Brownian
    bridge crossing probability, which removes most of the grid bias.
    """
    if not alpha > 0:
        raise DomainError("alpha must be > 0")
    if not 0 < dt <= 1e-3:
        raise DomainError("dt must lie in (0, 1e-3]")
    model_for(gamma)
    band = 2.0 * math.sqrt(dt) if zero_band is None else float(zero_band)
    cap = 100.0 / alpha + 100.0 if time_cap is None else float(time_cap)
    parts = _run_streams(_euler_chunk(float(gamma), float(alpha), dt, band, cap, bridge),
                         _split(n, n_streams), seed, workers)
    return McBatch.from_parts(alpha, gamma, seed, "euler", parts)


# ---------------------------------------------------------------------------
# long reflected paths


@dataclass
class PathRecord:
    """Reflected Euler paths run side by side for a common horizon.

    ``x`` holds every ``record_stride``-th state, shape (n_records, n_paths),
    and ``occupation`` the cumulative step counts below each tracked band at
    the same instants. Excursions are the intervals between successive
    visits to 0; only those whose maximum reached ``excursion_threshold``
    are kept, and the ones still open at the horizon are marked incomplete.
    """

    gamma: float
    dt: float
    horizon: float
    zero_band: float
    record_stride: int
    times: np.ndarray
    x: np.ndarray
    occupation: dict
    excursion_threshold: float
    exc_start: np.ndarray
    exc_end: np.ndarray
    exc_max: np.ndarray
    exc_path: np.ndarray
    exc_complete: np.ndarray
    seed: int = 0

    @property
    def n_paths(self) -> int:
        return self.x.shape[1]

    @property
    def total_time(self) -> float:
        return self.horizon * self.n_paths

    @property
    def excursions(self) -> list[tuple[float, float, float]]:
        return list(zip(self.exc_start.tolist(), self.exc_end.tolist(), self.exc_max.tolist()))

    @property
    def local_time_estimate(self) -> np.ndarray:
        band = max(self.occupation)
        return estimate_local_time(self, band)


def speed_mass(gamma: float, delta: float) -> float:
    """m((0, delta)) = int_0^delta 2 e^{-gamma x^2} dx."""
    if gamma == 0:
        return 2.0 * delta
    rg = math.sqrt(gamma)
    return math.sqrt(math.pi) / rg * math.erf(rg * delta)


def simulate_reflected_euler(gamma: float, dt: float, horizon: float, seed: int,
                             n_paths: int = 1, x0: float = 0.0, record_stride: int = 1,
                             bands=(0.05,), excursion_threshold: float = 0.0,
                             zero_band: float | None = None, max_records: int = 5 * 10**7,
                             stream_id: int = 0, finish_level: float | None = None) -> PathRecord:
    """Run n_paths reflected Euler paths X <- |X - gamma X dt + sqrt(dt) Z| up to horizon.

    With finish_level set, excursions still open at the horizon are run on
    (without recording states or occupation) until they return to 0 or reach
    finish_level. Every excursion started before the horizon then has its
    maximum known up to that level, so counts of maxima below it are unbiased.
    """
    if not 0 < dt <= 1e-3:
        raise DomainError("dt must lie in (0, 1e-3]")
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if n_paths < 1 or record_stride < 1:
        raise DomainError("n_paths and record_stride must be >= 1")
    model_for(gamma)
    n_steps = int(round(horizon / dt))
    n_records = n_steps // record_stride + 1
    if n_records * n_paths * (1 + len(bands)) > max_records:
        raise BudgetExceeded(
            f"{n_records} records x {n_paths} paths exceed the budget of {max_records}; raise record_stride")
    eps = 2.0 * math.sqrt(dt) if zero_band is None else float(zero_band)
    bands = tuple(sorted(float(b) for b in bands))
    stream = RandomStream(seed, stream_id)
    sqdt = math.sqrt(dt)

    x = np.full(n_paths, float(x0))
    xs = np.empty((n_records, n_paths))
    xs[0] = x
    counts = np.zeros((len(bands), n_paths))
    occ = np.zeros((len(bands), n_records, n_paths))
    band_arr = np.asarray(bands)[:, None]

    in_exc = x >= eps
    last_zero = np.zeros(n_paths)
    runmax = x.copy()
    ends: list[tuple] = []
    shrink = 1.0 - gamma * dt
    for k in range(1, n_steps + 1):
        prop = shrink * x + sqdt * stream.draw_normal(n_paths)
        x = np.abs(prop)
        zero = (prop < 0) | (x < eps)
        t = k * dt
        ending = in_exc & zero & (runmax >= excursion_threshold)
        if ending.any():
            idx = np.flatnonzero(ending)
            ends.append((last_zero[idx], np.full(idx.size, t), runmax[idx], idx))
        np.maximum(runmax, x, out=runmax)
        runmax[zero] = 0.0
        last_zero[zero] = t
        in_exc = ~zero
        counts += x < band_arr
        if k % record_stride == 0:
            r = k // record_stride
            xs[r] = x
            occ[:, r, :] = counts
    complete = [np.ones(e[3].size, bool) for e in ends]
    end_time = np.full(n_paths, n_steps * dt)
    if finish_level is not None:
        k = n_steps
        live = np.flatnonzero(in_exc & (runmax < finish_level))
        xl = x[live]
        while live.size:
            k += 1
            prop = shrink * xl + sqdt * stream.draw_normal(live.size)
            xl = np.abs(prop)
            zero = (prop < 0) | (xl < eps)
            runmax[live] = np.maximum(runmax[live], xl)
            ended = zero & (runmax[live] >= excursion_threshold)
            if ended.any():
                idx = live[ended]
                ends.append((last_zero[idx], np.full(idx.size, k * dt), runmax[idx], idx))
                complete.append(np.ones(idx.size, bool))
            in_exc[live[zero]] = False
            end_time[live] = k * dt
            keep = ~zero & (xl < finish_level)
            live, xl = live[keep], xl[keep]
    # excursions still open at the horizon (or at finish_level)
    open_idx = np.flatnonzero(in_exc & (runmax >= excursion_threshold))
    complete.append(np.zeros(open_idx.size, bool))
    ends.append((last_zero[open_idx], end_time[open_idx], runmax[open_idx], open_idx))
    cat = lambda i: np.concatenate([e[i] for e in ends])
    return PathRecord(
        gamma=float(gamma), dt=dt, horizon=n_steps * dt, zero_band=eps, record_stride=record_stride,
        times=np.arange(n_records) * record_stride * dt, x=xs,
        occupation={b: occ[i] for i, b in enumerate(bands)},
        excursion_threshold=excursion_threshold,
        exc_start=cat(0), exc_end=cat(1), exc_max=cat(2), exc_path=cat(3).astype(int),
        exc_complete=np.concatenate(complete), seed=seed,
    )


def estimate_local_time(path: PathRecord, delta_band: float) -> np.ndarray:
    """Occupation estimate of the local time at 0, at the recorded instants.

    L_t ~ dt * #{steps with x < delta} / m((0, delta)); shape (n_records, n_paths).
    """
    lo = 2.0 * math.sqrt(path.dt)
    if not lo <= delta_band <= 0.1:
        raise DomainError(f"band must lie in [{lo:.3g}, 0.1] for dt={path.dt}")
    if delta_band in path.occupation:
        counts = path.occupation[delta_band]
    elif path.record_stride == 1:
        counts = np.cumsum(path.x < delta_band, axis=0) - (path.x[0] < delta_band)
    else:
        raise DomainError(f"band {delta_band} was not tracked and the path is thinned")
    return counts * path.dt / speed_mass(path.gamma, delta_band)


def count_excursion_maxima(path: PathRecord, a: float, local_time: float | None = None) -> float:
    """Excursions per unit local time whose maximum reaches a; estimates 1/S(a).

    An excursion counts once its running maximum reaches a, so one still
    open at the horizon counts too. local_time defaults to the summed
    estimate of the widest tracked band.
    """
    if not a > 0:
        raise DomainError("level must be > 0")
    if a < path.excursion_threshold:
        raise DomainError("level lies below the recorded excursion threshold")
    if local_time is None:
        local_time = float(path.local_time_estimate[-1].sum())
    if not local_time > 0:
        raise DomainError("zero local time: no visits to 0 were recorded")
    return int(np.count_nonzero(path.exc_max >= a)) / local_time


# ---------------------------------------------------------------------------
# Williams pair: two upward-conditioned paths put back to back


def _upward_step(model, x, dt, normals):
    # Bessel(3) step taken exactly as the norm of a 3-d Gaussian move, with the
    # smooth part of the drift added explicitly; stable at the entrance pole
    r = model.upward_drift_remainder(x)
    head = x + r * dt + math.sqrt(dt) * normals[..., 0]
    return np.sqrt(head * head + dt * (normals[..., 1] ** 2 + normals[..., 2] ** 2))


def _run_upward(model, a, x0, dt, stream, n, max_steps, keep_path):
    x = np.full(n, float(x0))
    hit = np.full(n, np.nan)
    active = np.arange(n)
    xa = x
    trace = [x.copy()] if keep_path else None
    k = 0
    while active.size:
        k += 1
        if k > max_steps:
            raise BudgetExceeded(f"{active.size} upward paths below level {a} after {max_steps} steps")
        xa = _upward_step(model, xa, dt, stream.draw_normal((active.size, 3)))
        if keep_path:
            trace.append(np.minimum(xa, a))
        done = xa >= a
        if done.any():
            hit[active[done]] = k * dt
            active, xa = active[~done], xa[~done]
    return hit, (np.concatenate(trace) if keep_path else None)


@dataclass(frozen=True)
class WilliamsExcursion:
    """Excursion-shaped path: one upward path, then another one time-reversed."""

    times: np.ndarray
    x: np.ndarray
    rise_time: float
    fall_time: float

    @property
    def duration(self) -> float:
        return self.rise_time + self.fall_time

    @property
    def maximum(self) -> float:
        return float(self.x.max())


def sample_williams_pair(gamma: float, a: float, x0_start: float = 1e-4, dt: float = 1e-4,
                         seed: int = 0, stream_id: int = 0, max_steps: int = 10**7) -> WilliamsExcursion:
    """Excursion with maximum a from two independent upward paths run to level a."""
    if not a > x0_start > 0:
        raise DomainError("need a > x0_start > 0")
    model = model_for(gamma)
    stream = RandomStream(seed, stream_id)
    h1, p1 = _run_upward(model, a, x0_start, dt, stream, 1, max_steps, True)
    h2, p2 = _run_upward(model, a, x0_start, dt, stream, 1, max_steps, True)
    # rise along the first path, then run the second one backwards from a
    x = np.concatenate([p1, p2[::-1][1:]])
    times = np.arange(x.size) * dt
    return WilliamsExcursion(times, x, float(h1[0]), float(h2[0]))


def williams_hitting_times(gamma: float, a: float, n: int, x0_start: float = 1e-4,
                           dt: float = 1e-4, seed: int = 0, stream_id: int = 0,
                           max_steps: int = 10**7) -> np.ndarray:
    """First times at level a of n independent upward paths from x0_start."""
    if not a > x0_start > 0:
        raise DomainError("need a > x0_start > 0")
    model = model_for(gamma)
    hit, _ = _run_upward(model, a, x0_start, dt, RandomStream(seed, stream_id), n, max_steps, False)
    return hit


def williams_durations(gamma: float, a: float, n: int, x0_start: float = 1e-4,
                       dt: float = 1e-4, seed: int = 0, max_steps: int = 10**7) -> np.ndarray:
    """Lengths of n Williams-pair excursions with maximum a."""
    h = williams_hitting_times(gamma, a, 2 * n, x0_start, dt, seed, 0, max_steps)
    return h[:n] + h[n:]


# ---------------------------------------------------------------------------


def ks_statistic(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between the empirical law of samples and cdf.

    Censored samples (+inf) are allowed and sit where the cdf equals 1.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise DomainError("samples must be nonempty")
    if np.any(np.isnan(samples)):
        raise DomainError("samples contain NaN")

    def guarded(v):
        v = np.asarray(v, dtype=float)
        finite = np.isfinite(v)
        return np.where(finite, cdf(np.where(finite, v, 0.0)), np.where(v > 0, 1.0, 0.0))

    return float(stats.kstest(samples, guarded).statistic)
