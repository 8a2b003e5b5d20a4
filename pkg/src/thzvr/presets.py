"""Built-in parameter sets.

``PHYSICAL`` holds the indoor THz scenario constants.  The figure presets add
the geometry (d0, eta, r, omega) and the processing rate, which the published
scenario leaves unstated; those values are reconstructions chosen to exhibit
the reported behaviour and are documented in the README.
"""
from __future__ import annotations

import copy

PHYSICAL = {
    "channel": {"f": 1e12, "K": 0.0016, "T": 300.0, "p": 1.0, "W": 10e9, "L": 10e6},
    "deployment": {"area": 20.0},
    "queue": {"lambda1": 0.1},
}

# Keys with no published value: a config must set them or name a preset.
RECONSTRUCTED_KEYS = ("channel.d0", "deployment.eta", "deployment.r", "deployment.omega", "queue.mu1")

_COMMON = {
    "seed": 20240601,
    "grid_points": 2**14 + 1,
    "replications": 1,
    "workers": 1,
    "deltas": [0.010, 0.020, 0.030],
    "sim": {"n_requests": 111_112, "warmup": 11_112, "interference_mode": "gaussian",
            "queue_cap": 100_000},
    "txpdf": {"n_packets": 100_000, "bins": 200},
}

PRESETS: dict[str, dict] = {
    # Dense deployment whose interference mean sits about 3.1 sigma above zero,
    # so clipping the Gaussian at zero moves < 1e-3 of the mass; mu1 is the
    # literal 2 Gbit/s divided by L.
    "validation": {
        "channel": {"d0": 0.5},
        "deployment": {"eta": 2.8, "r": 0.3, "omega": 10.0},
        "queue": {"mu1": 200.0},
        "sweeps": {"bandwidth": {"min": 5e9, "max": 20e9, "steps": 16}},
    },
    # Reliability vs bandwidth: fitted so that 0.99999 at 30 ms is reached at
    # about 10 GHz with a 16.4 Gbit/s link and Q2 stops dominating near 13 GHz.
    "fig3": {
        "channel": {"d0": 2.3},
        "deployment": {"eta": 0.0094, "r": 4.1, "omega": 10.0},
        "queue": {"mu1": 1866.0},
        "sweeps": {"bandwidth": {"min": 4e9, "max": 20e9, "steps": 33}},
    },
    # Reliability vs interference radius: same room and SBS density as fig3 at
    # W = 20 GHz, where the interference law has negligible mass below -N0.
    "fig4": {
        "channel": {"d0": 11.0, "W": 20e9},
        "deployment": {"eta": 0.0094, "r": 4.1, "omega": 10.0},
        "queue": {"mu1": 1866.0},
        "sweeps": {"region": {"min": 4.3, "max": 14.0, "steps": 12, "d0": [8.0, 11.0, 14.0]}},
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def preset(name: str) -> dict:
    """Full nested config for a named preset."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return _merge(_merge(PHYSICAL, _COMMON), PRESETS[name])


def base_config() -> dict:
    """Physical constants and run settings without any reconstructed geometry."""
    return _merge(PHYSICAL, _COMMON)


merge = _merge
