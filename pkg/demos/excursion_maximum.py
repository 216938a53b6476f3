"""
How high do excursions go?
==========================

Counts excursions of a reflected Euler path whose maximum reaches a, per
unit of local time at 0, and compares with 1 / S(a). Then builds single
excursions with a prescribed maximum from two upward-conditioned paths.
Run with ``python3 demos/excursion_maximum.py`` (about half a minute).
"""

import math

import numpy as np

from excursions.diffusion import OrnsteinUhlenbeck, ReflectedBrownianMotion, scale_S
from excursions.montecarlo import (
    count_excursion_maxima,
    sample_williams_pair,
    simulate_reflected_euler,
    williams_hitting_times,
)

levels = (0.5, 1.0, 1.5)

# %% excursion counts against the scale function
for name, model, gamma in (("ou(gamma=1)", OrnsteinUhlenbeck(1.0), 1.0), ("bm", ReflectedBrownianMotion(), 0.0)):
    path = simulate_reflected_euler(gamma, 1e-4, 10.0, seed=5, n_paths=1000, record_stride=1000,
                                    excursion_threshold=0.25, finish_level=2.0)
    print(f"\n{name}: local time collected {path.local_time_estimate[-1].sum():.1f}")
    for a in levels:
        est = count_excursion_maxima(path, a)
        print(f"  a={a:3.1f}  estimate {est:.4f}  1/S(a) {1 / scale_S(model, a):.4f}")

# %% one excursion with maximum 1
w = sample_williams_pair(1.0, 1.0, dt=1e-4, seed=3)
print(f"\nexcursion with maximum {w.maximum:.3f}: rise {w.rise_time:.3f}, fall {w.fall_time:.3f}, "
      f"length {w.duration:.3f}")
peak = int(np.argmax(w.x))
print(f"peak reached at t={w.times[peak]:.3f}, {w.x.size} recorded states")

# %% rise times against their Laplace transform
h = williams_hitting_times(0.0, 1.0, 4000, dt=1e-4, seed=8)
print(f"\nBM: E exp(-H_1) simulated {np.exp(-h).mean():.4f}, "
      f"exact {math.sqrt(2) / math.sinh(math.sqrt(2)):.4f}")
