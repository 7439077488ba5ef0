"""Analytical and Monte Carlo evaluation of NOMA small cells in a HetNet with a massive-MIMO macro tier."""

from ._hetnoma import *  # noqa: F401,F403
from ._hetnoma import __doc__  # noqa: F401


def reference_config(small_tiers=1):
    """Reference scenario: 500 m macro cells, 20x denser 20 dBm small cells."""
    import math

    cfg = NetworkConfig()  # noqa: F405
    cfg.macro.density = 1.0 / (math.pi * 500.0**2)
    cfg.macro.power_w = dbm_to_watts(40.0)  # noqa: F405
    cfg.macro.path_loss_exponent = 3.5
    cfg.macro.antennas = 200
    cfg.macro.streams = 15
    tiers = []
    for _ in range(small_tiers):
        t = SmallTier()  # noqa: F405
        t.density = 20.0 * cfg.macro.density
        t.power_w = dbm_to_watts(20.0)  # noqa: F405
        t.path_loss_exponent = 4.0
        t.bias = 1.0
        t.pair_distance_m = 10.0
        t.far_share = 0.6
        t.near_share = 0.4
        tiers.append(t)
    cfg.small_tiers = tiers
    cfg.eta = free_space_eta(1e9)  # noqa: F405
    cfg.noise_power_w = thermal_noise_watts(1e7, 10.0)  # noqa: F405
    return cfg
