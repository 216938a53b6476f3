"""Frozen reference values and the mpmath routines that produced them.

Run ``python3 tests/oracle_values.py`` to recompute every entry at 30 digits
and compare with the frozen table. The routines use definitions (integrals,
eigenfunction series, Gamma ratios) rather than the package's closed forms.
"""

import mpmath as mp

mp.mp.dps = 30

FROZEN = {
    "ou1_scale_1": 1.4626517459071815,
    "ou1_upward_drift_1": 0.8584614116555019,
    "ou1_p00_1": 0.6067379988373828,
    "ou1_f_hit_1_1": 0.441483241254894,
    "ou1_phat_1_1_1": 0.42475554025753326,
    "ou1_nu_1": 0.5162843623023774,
    "ou1_nu_tail_1": 0.4464128718995512,
    "ou1_phi_1": 1.1283791670955126,
    "ou1_phi_2": 1.772453850905516,
    "ou2_phi_1": 0.9559775949722501,
    "ou1_delta_a1_alpha1": 0.28922366623718415,
    "ou1_t_minus_g_u1_alpha1": 0.1455416074978319,
    "ou1_d_minus_t_v1_alpha1": 0.20499950279874457,
    "ou1_g_u1_alpha1": 0.25186149228736565,
    "ou1_joint_half_half_alpha1": 0.2775151332088277,
    "ou1_cdf_delta_a1_alpha1": 0.6797919955839505,
    "bm_delta_a1_alpha1": 0.17831791741872946,
    "bm_d_minus_t_v1_alpha1": 0.13660600739194928,
    "bm_g_u1_alpha1": 0.20755374871029736,
    "ou1_stationary_delta_1": 0.29128225935959723,
}


def ou_scale(x, g=1):
    return mp.quad(lambda y: mp.exp(g * y * y), [0, x])


def ou_phi(lam, g=1):
    # Levy-Khintchine integral of the density of the excursion lengths
    return mp.quad(lambda v: (1 - mp.exp(-lam * v)) * ou_nu_closed(v, g), [0, 1, mp.inf])


def ou_nu(t, g=1):
    # exponential series of the Krein representation
    return (2 / mp.sqrt(mp.pi)) * g ** 1.5 * mp.nsum(
        lambda n: mp.binomial(n + mp.mpf(1) / 2, n) * mp.exp(-(2 * n + 1) * g * t), [0, mp.inf])


def ou_nu_closed(t, g=1):
    # used inside integrands; compute() asserts it agrees with the series
    return g ** 1.5 * mp.exp(g * t / 2) / (mp.sqrt(2 * mp.pi) * mp.sinh(g * t) ** 1.5)


def ou_nu_tail(u, g=1):
    return mp.quad(lambda t: ou_nu_closed(t, g), [u, u + 1, mp.inf])


def ou_p00(t):
    # 1 / Phi-free route: stationary density 1/sqrt(pi) plus spectral corrections
    return mp.nsum(lambda n: mp.exp(-2 * n * t) * mp.binomial(n - mp.mpf(1) / 2, n), [0, mp.inf]) / mp.sqrt(mp.pi)


def ou_f_hit(x, t):
    lag = lambda n: mp.laguerre(n, mp.mpf(1) / 2, x * x)
    return (2 / mp.sqrt(mp.pi)) * x * mp.nsum(lambda n: mp.exp(-(2 * n + 1) * t) * lag(n), [0, mp.inf])


def ou_phat(t, x, y):
    def term(n):
        norm = mp.binomial(n + mp.mpf(1) / 2, n)
        return mp.exp(-(2 * n + 1) * t) * mp.laguerre(n, 0.5, x * x) * mp.laguerre(n, 0.5, y * y) / norm
    return (2 / mp.sqrt(mp.pi)) * x * y * mp.nsum(term, [0, mp.inf])


def bm_nu(t):
    return t ** mp.mpf(-1.5) / mp.sqrt(2 * mp.pi)


def compute():
    for t in (0.3, 1, 2.5):
        assert abs(ou_nu(t) - ou_nu_closed(t)) < mp.mpf(10) ** -25
    phi1 = ou_phi(1)
    out = {
        "ou1_scale_1": ou_scale(1),
        "ou1_upward_drift_1": -1 + mp.e / ou_scale(1),
        "ou1_p00_1": ou_p00(1),
        "ou1_f_hit_1_1": ou_f_hit(1, 1),
        "ou1_phat_1_1_1": ou_phat(1, 1, 1),
        "ou1_nu_1": ou_nu(1),
        "ou1_nu_tail_1": ou_nu_tail(1),
        "ou1_phi_1": phi1,
        "ou1_phi_2": ou_phi(2),
        "ou2_phi_1": ou_phi(1, 2),
        "ou1_delta_a1_alpha1": (1 - mp.exp(-1)) * ou_nu(1) / phi1,
        "ou1_t_minus_g_u1_alpha1": mp.exp(-1) * ou_nu_tail(1) / phi1,
        "ou1_d_minus_t_v1_alpha1": mp.e * mp.quad(lambda z: mp.exp(-z) * ou_nu_closed(z), [1, 2, mp.inf]) / phi1,
        "ou1_g_u1_alpha1": phi1 * mp.exp(-1) * ou_p00(1),
        "ou1_joint_half_half_alpha1": mp.exp(-0.5) * ou_nu(1) / phi1,
        "ou1_cdf_delta_a1_alpha1": mp.quad(lambda a: (1 - mp.exp(-a)) * ou_nu_closed(a) / phi1, [0, 0.1, 1]),
        "bm_delta_a1_alpha1": (1 - mp.exp(-1)) * bm_nu(1) / mp.sqrt(2),
        "bm_d_minus_t_v1_alpha1": mp.e * mp.quad(lambda z: mp.exp(-z) * bm_nu(z), [1, mp.inf]) / mp.sqrt(2),
        "bm_g_u1_alpha1": mp.sqrt(2) * mp.exp(-1) / mp.sqrt(2 * mp.pi),
        "ou1_stationary_delta_1": ou_nu(1) / mp.sqrt(mp.pi),
    }
    return {k: float(v) for k, v in out.items()}


if __name__ == "__main__":
    fresh = compute()
    for key, val in fresh.items():
        frozen = FROZEN.get(key)
        flag = "" if frozen is not None and abs(frozen - val) <= 1e-14 * max(1, abs(val)) else "  <-- differs"
        print(f"{key:34s} {val!r:>24}  frozen {frozen!r}{flag}")
