"""Experiment configuration: nested dict / YAML file -> typed parameter objects."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import yaml

from . import presets
from .channel import ChannelParams
from .delay import QueueParams
from .geometry import DeploymentParams, InterferenceStats, interference_stats
from .simulator import MODES, SimConfig

SWEEP_PARAMS = {"bandwidth": "channel.W", "region": "deployment.omega"}


class ConfigError(ValueError):
    """Bad or incomplete configuration; the message names the offending key."""


_SECTIONS = {
    "channel": {f.name for f in fields(ChannelParams)},
    "deployment": {f.name for f in fields(DeploymentParams)},
    "queue": {f.name for f in fields(QueueParams)},
    "sim": {"n_requests", "warmup", "interference_mode", "queue_cap"},
    "txpdf": {"n_packets", "bins"},
    "sweeps": {"bandwidth", "region"},
}
_SCALARS = {"preset", "seed", "grid_points", "replications", "workers", "deltas", "out"}


@dataclass
class ExperimentConfig:
    channel: ChannelParams
    deployment: DeploymentParams
    queue: QueueParams
    sim: dict
    txpdf: dict
    sweeps: dict
    deltas: tuple
    seed: int
    grid_points: int
    replications: int = 1
    workers: int = 1
    out: str = "results"
    preset: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def stats(self) -> InterferenceStats:
        return interference_stats(self.deployment, self.channel.p, self.channel.A0)

    def sim_config(self, seed: int | None = None, **overrides) -> SimConfig:
        kw = dict(self.sim)
        kw.update(overrides)
        return SimConfig(self.channel, self.deployment, self.queue,
                         seed=self.seed if seed is None else seed, deltas=self.deltas, **kw)

    def sweep(self, name: str) -> dict:
        try:
            return self.sweeps[name]
        except KeyError:
            raise ConfigError(f"missing required key: sweeps.{name}") from None

    def provenance(self) -> dict:
        """Flat resolved parameter set, for output headers."""
        out = {"preset": self.preset, "seed": self.seed, "grid_points": self.grid_points,
               "replications": self.replications, "deltas": list(self.deltas)}
        for sec in ("channel", "deployment", "queue"):
            out.update({f"{sec}.{k}": v for k, v in asdict(getattr(self, sec)).items()})
        out.update({f"sim.{k}": v for k, v in self.sim.items()})
        return out


def _check_keys(d: dict):
    for k, v in d.items():
        if k in _SECTIONS:
            if not isinstance(v, dict):
                raise ConfigError(f"key {k!r} must be a mapping")
            unknown = set(v) - _SECTIONS[k]
            if unknown:
                raise ConfigError(f"unknown key: {k}.{sorted(unknown)[0]}")
        elif k not in _SCALARS:
            raise ConfigError(f"unknown key: {k}")


def _get(d: dict, dotted: str):
    cur = d
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ConfigError(f"missing required key: {dotted}")
        cur = cur[part]
    return cur


def _check_sweep(name: str, sw) -> dict:
    if not isinstance(sw, dict):
        raise ConfigError(f"key sweeps.{name} must be a mapping")
    for k in ("min", "max", "steps"):
        if k not in sw:
            raise ConfigError(f"missing required key: sweeps.{name}.{k}")
    lo, hi, steps = float(sw["min"]), float(sw["max"]), int(sw["steps"])
    if not (math.isfinite(lo) and math.isfinite(hi)) or steps < 1 or (steps > 1 and not hi > lo):
        raise ConfigError(f"degenerate sweep sweeps.{name}: min={lo}, max={hi}, steps={steps}")
    out = dict(sw, min=lo, max=hi, steps=steps)
    if name == "region":
        d0 = sw.get("d0")
        if d0 is None:
            raise ConfigError("missing required key: sweeps.region.d0")
        out["d0"] = [float(x) for x in (d0 if isinstance(d0, (list, tuple)) else [d0])]
        if not out["d0"]:
            raise ConfigError("sweeps.region.d0 must list at least one distance")
    return out


def from_dict(d: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Resolve a user mapping (optionally naming a preset) into an ExperimentConfig."""
    if d is None:
        d = {}
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a mapping at top level")
    _check_keys(d)
    name = d.get("preset")
    try:
        base = presets.preset(name) if name else presets.base_config()
    except KeyError as e:
        raise ConfigError(f"preset: {e.args[0]}") from None
    merged = presets.merge(base, d)
    merged = presets.merge(merged, {k: v for k, v in (overrides or {}).items() if v is not None})
    for key in presets.RECONSTRUCTED_KEYS:
        _get(merged, key)
    try:
        ch = ChannelParams(**merged["channel"])
        dep = DeploymentParams(**merged["deployment"])
        q = QueueParams(**merged["queue"])
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    sim = dict(merged.get("sim", {}))
    if sim.get("interference_mode", "gaussian") not in MODES:
        raise ConfigError(f"sim.interference_mode must be one of {MODES}")
    sweeps = {k: _check_sweep(k, v) for k, v in (merged.get("sweeps") or {}).items()}
    deltas = tuple(float(x) for x in _get(merged, "deltas"))
    if not deltas or min(deltas) < 0:
        raise ConfigError("deltas must be a non-empty list of non-negative thresholds")
    cfg = ExperimentConfig(
        channel=ch, deployment=dep, queue=q, sim=sim, txpdf=dict(merged.get("txpdf", {})),
        sweeps=sweeps, deltas=deltas, seed=int(_get(merged, "seed")),
        grid_points=int(_get(merged, "grid_points")), replications=int(merged.get("replications", 1)),
        workers=int(merged.get("workers", 1)), out=str(merged.get("out", "results")),
        preset=name, raw=merged)
    if cfg.grid_points < 3 or cfg.replications < 1 or cfg.workers < 1:
        raise ConfigError("grid_points >= 3, replications >= 1 and workers >= 1 are required")
    try:
        cfg.sim_config()
    except ValueError as e:
        raise ConfigError(f"sim: {e}") from None
    return cfg


def load(path: str | None = None, overrides: dict | None = None, default_preset: str = "validation") -> ExperimentConfig:
    """Read a YAML config; without a path the ``default_preset`` is used."""
    if path is None:
        return from_dict({"preset": default_preset}, overrides)
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: {where}: {e.problem}") from None
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return from_dict(data, overrides)


def sweep_values(sw: dict) -> np.ndarray:
    return np.linspace(sw["min"], sw["max"], sw["steps"])
