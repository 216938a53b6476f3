"""
From an exponential time to a stationary observer
=================================================

As alpha -> 0 the exponential time T spreads out and the straddling
excursion of reflected OU approaches its stationary law a nu(a) / m(R+),
with the observer uniformly placed inside it. The verification battery
runs at the end. Run with ``python3 demos/stationary_limit.py``.
"""

import math

from excursions.diffusion import OrnsteinUhlenbeck
from excursions.localtime import r00_quadrature
from excursions.straddle import StraddleLaw, stationary_delta_density
from excursions.verify import run_all

model = OrnsteinUhlenbeck(1.0)

# %% density of Delta_T at a = 1 as alpha shrinks
target = stationary_delta_density(model, 1.0)
print(f"stationary density at a=1: {target:.7f}")
for alpha in (1.0, 0.1, 1e-2, 1e-3, 1e-4):
    law = StraddleLaw(model, alpha)
    print(f"  alpha={alpha:<7g} density {law.density_delta(1.0):.7f}  "
          f"gap {abs(law.density_delta(1.0) - target):.2e}")

# %% position of T inside an excursion of length 1
law = StraddleLaw(model, 1e-4)
print("\nconditional density of T - G_T given Delta_T = 1:",
      ", ".join(f"{law.cond_tg_given_delta(u, 1.0):.5f}" for u in (0.1, 0.5, 0.9)))

# %% alpha R_alpha(0, 0) tends to 1 / m(R+)
green = r00_quadrature(model, 1e-4)
print(f"alpha R_alpha(0,0) at alpha=1e-4: {1e-4 * green.value:.6f}, 1/sqrt(pi) = {1 / math.sqrt(math.pi):.6f}")

# %% the identity battery
suite = run_all([model])
summary = suite.to_dict()["summary"]
print(f"\nverification: {summary}")
