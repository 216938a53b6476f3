"""
The excursion straddling an exponential time
============================================

Tabulates the laws of G_T, T - G_T and Delta_T for reflected OU and
reflected Brownian motion, then checks them against the exact sampler.
Run with ``python3 demos/straddle_laws.py``.
"""

import numpy as np

from excursions.diffusion import OrnsteinUhlenbeck, ReflectedBrownianMotion
from excursions.montecarlo import ks_statistic, sample_straddle_exact
from excursions.straddle import StraddleLaw

alpha = 1.0
models = {"ou(gamma=1)": (OrnsteinUhlenbeck(1.0), 1.0), "bm": (ReflectedBrownianMotion(), 0.0)}

# %% densities on a grid
grid = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
for name, (model, _) in models.items():
    law = StraddleLaw(model, alpha)
    print(f"\n{name}, alpha={alpha}: Phi(alpha) = {law.phi_alpha:.6f}")
    print(f"{'x':>6} {'Delta_T':>10} {'T - G_T':>10} {'D_T - T':>10} {'G_T':>10}")
    for x in grid:
        print(f"{x:6.2f} {law.density_delta(x):10.6f} {law.density_t_minus_g(x):10.6f} "
              f"{law.density_d_minus_t(x):10.6f} {law.density_g(x):10.6f}")

# %% the straddling excursion is longer than a typical one
# Delta_T is size-biased: its mean is finite for OU and infinite for BM
law = StraddleLaw(OrnsteinUhlenbeck(1.0), alpha)
print("\nP(Delta_T <= a), OU:", ", ".join(f"a={a:g}: {law.cdf_delta(a):.4f}" for a in (0.5, 1, 2, 5)))
law_bm = StraddleLaw(ReflectedBrownianMotion(), alpha)
print("P(Delta_T <= a), BM:", ", ".join(f"a={a:g}: {law_bm.cdf_delta(a):.4f}" for a in (0.5, 1, 2, 5)))

# %% exact simulation through the Brownian time change
for name, (model, gamma) in models.items():
    law = StraddleLaw(model, alpha)
    batch = sample_straddle_exact(gamma, alpha, 100_000, seed=1)
    ks = {v: ks_statistic(getattr(batch, v), getattr(law, f"cdf_{v}")) for v in ("delta", "t_minus_g", "g")}
    print(f"\n{name}: KS distances at n=1e5:", ", ".join(f"{k} {v:.4f}" for k, v in ks.items()))

# %% an independent second arcsine draw gets the joint law wrong
law = StraddleLaw(OrnsteinUhlenbeck(1.0), alpha)
wrong = sample_straddle_exact(1.0, alpha, 100_000, seed=1, joint="independent")
print(f"\nindependent shortcut: KS(T - G_T) = {ks_statistic(wrong.t_minus_g, law.cdf_t_minus_g):.4f}, "
      f"KS(Delta_T) = {ks_statistic(wrong.delta, law.cdf_delta):.4f}")
