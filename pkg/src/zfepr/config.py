"""Run configuration: a strict nested JSON document with units in key names.

Unknown keys are rejected with their full dotted path; values are
type-checked on load.  A RunConfig carries everything a CLI run needs
except the input data files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .ensemble import EnsembleParams
from .relaxometry import SensorParams
from .spinmodel import TEMPO_N14, TEMPO_N15, HyperfineSystem


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepGrid:
    start_mhz: float = 20.0
    stop_mhz: float = 110.0
    n_points: int = 451

    def frequencies(self):
        import numpy as np
        if self.n_points < 2:
            raise ConfigError("sweep.n_points must be >= 2")
        if self.stop_mhz <= self.start_mhz:
            raise ConfigError("sweep.stop_mhz must exceed sweep.start_mhz")
        return np.linspace(self.start_mhz, self.stop_mhz, self.n_points)


@dataclass(frozen=True)
class RunConfig:
    system: HyperfineSystem
    sensor: SensorParams
    concentration_mm: float
    gamma2_target_mhz: float
    sweep: SweepGrid
    noise_sigma: float
    baseline_kind: str
    baseline_slope_per_mhz: float
    baseline_offset: float
    mc_n_samples: int
    mc_transition_index: int
    seed: int
    workers: int
    output_prefix: str

    @property
    def gamma2_total_mhz(self) -> float:
        return self.sensor.gamma2_nv + self.gamma2_target_mhz

    def ensemble_params(self, xi: float) -> EnsembleParams:
        return EnsembleParams(
            concentration=self.concentration_mm,
            depth_h=self.sensor.depth_h,
            surface_alpha=self.sensor.surface_alpha,
            kappa=self.sensor.kappa,
            gamma2_total=self.gamma2_total_mhz,
            nuclear_spin_twice=self.system.nuclear_spin_twice,
            xi=xi,
        )


_PRESETS = {"tempo_n14": TEMPO_N14, "tempo_n15": TEMPO_N15}

# section -> key -> (type, default).  REQUIRED means no default.
REQUIRED = object()

_SCHEMA = {
    "system": {
        "preset": (str, None),
        "nuclear_spin_twice": (int, None),
        "a_perp_mhz": ((int, float), None),
        "a_par_mhz": ((int, float), None),
        "label": (str, None),
    },
    "sensor": {
        "gamma1_prime_per_ms": ((int, float), 1.0 / 1.3),
        "gamma2_nv_mhz": ((int, float), 0.5),
        "kappa": ((int, float), 0.58),
        "depth_nm": ((int, float), 8.0),
        "surface_alpha_rad": ((int, float), 0.0),
    },
    "ensemble": {
        "concentration_mm": ((int, float), 100.0),
        "gamma2_target_mhz": ((int, float), 2.5),
    },
    "sweep": {
        "start_mhz": ((int, float), 20.0),
        "stop_mhz": ((int, float), 110.0),
        "n_points": (int, 451),
    },
    "noise": {
        "sigma": ((int, float), 0.0),
    },
    "baseline": {
        "kind": (str, "none"),
        "slope_per_mhz": ((int, float), 0.0),
        "offset": ((int, float), 0.0),
    },
    "mc": {
        "n_samples": (int, 1_000_000),
        "transition_index": (int, 0),
    },
    "seed": (int, 0),
    "workers": (int, 1),
    "output": {
        "prefix": (str, "run"),
    },
}


def _check_section(doc: dict, name: str, schema: dict) -> dict:
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object, got {type(raw).__name__}")
    out = {}
    for key, value in raw.items():
        if key not in schema:
            raise ConfigError(
                f"{name}.{key}: unknown key (known: {', '.join(sorted(schema))})")
        typ, _ = schema[key]
        if isinstance(value, bool) or not isinstance(value, typ):
            raise ConfigError(
                f"{name}.{key}: expected {getattr(typ, '__name__', 'number')},"
                f" got {type(value).__name__}")
        out[key] = value
    for key, (_, default) in schema.items():
        out.setdefault(key, default)
    return out


def _build_system(sec: dict) -> HyperfineSystem:
    if sec["preset"] is not None:
        if sec["preset"] not in _PRESETS:
            raise ConfigError(
                f"system.preset: unknown preset {sec['preset']!r} "
                f"(known: {', '.join(sorted(_PRESETS))})")
        base = _PRESETS[sec["preset"]]
        spin = sec["nuclear_spin_twice"] or base.nuclear_spin_twice
        a_perp = base.a_perp if sec["a_perp_mhz"] is None else sec["a_perp_mhz"]
        a_par = base.a_par if sec["a_par_mhz"] is None else sec["a_par_mhz"]
        label = sec["label"] or base.label
    else:
        missing = [k for k in ("nuclear_spin_twice", "a_perp_mhz", "a_par_mhz")
                   if sec[k] is None]
        if missing:
            raise ConfigError(
                "system: missing required key(s) "
                + ", ".join(f"system.{k}" for k in missing))
        spin, a_perp, a_par = (sec["nuclear_spin_twice"], sec["a_perp_mhz"],
                               sec["a_par_mhz"])
        label = sec["label"] or "custom"
    try:
        return HyperfineSystem(spin, float(a_perp), float(a_par), label)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")
    known = set(_SCHEMA)
    for key in doc:
        if key not in known:
            raise ConfigError(
                f"{key}: unknown top-level key (known: {', '.join(sorted(known))})")
    for scalar in ("seed", "workers"):
        if scalar in doc:
            val = doc[scalar]
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{scalar}: expected int, got {type(val).__name__}")

    system = _build_system(_check_section(doc, "system", _SCHEMA["system"]))
    sen = _check_section(doc, "sensor", _SCHEMA["sensor"])
    ens = _check_section(doc, "ensemble", _SCHEMA["ensemble"])
    swp = _check_section(doc, "sweep", _SCHEMA["sweep"])
    noi = _check_section(doc, "noise", _SCHEMA["noise"])
    bas = _check_section(doc, "baseline", _SCHEMA["baseline"])
    mc = _check_section(doc, "mc", _SCHEMA["mc"])
    out = _check_section(doc, "output", _SCHEMA["output"])

    if bas["kind"] not in ("none", "slanted"):
        raise ConfigError(
            f"baseline.kind: expected 'none' or 'slanted', got {bas['kind']!r}")
    if noi["sigma"] < 0:
        raise ConfigError("noise.sigma: must be >= 0")
    if ens["gamma2_target_mhz"] < 0:
        raise ConfigError("ensemble.gamma2_target_mhz: must be >= 0")
    workers = doc.get("workers", _SCHEMA["workers"][1])
    if workers < 1:
        raise ConfigError("workers: must be >= 1")
    if mc["n_samples"] < 1000:
        raise ConfigError("mc.n_samples: must be >= 1000")
    if not math.isfinite(sen["surface_alpha_rad"]) or not (
            0.0 <= sen["surface_alpha_rad"] <= math.pi / 2.0):
        raise ConfigError("sensor.surface_alpha_rad: must be in [0, pi/2]")

    try:
        sensor = SensorParams(
            gamma1_prime=float(sen["gamma1_prime_per_ms"]),
            gamma2_nv=float(sen["gamma2_nv_mhz"]),
            kappa=float(sen["kappa"]),
            depth_h=float(sen["depth_nm"]),
            surface_alpha=float(sen["surface_alpha_rad"]),
        )
    except ValueError as exc:
        raise ConfigError(f"sensor: {exc}") from exc

    cfg = RunConfig(
        system=system,
        sensor=sensor,
        concentration_mm=float(ens["concentration_mm"]),
        gamma2_target_mhz=float(ens["gamma2_target_mhz"]),
        sweep=SweepGrid(float(swp["start_mhz"]), float(swp["stop_mhz"]),
                        int(swp["n_points"])),
        noise_sigma=float(noi["sigma"]),
        baseline_kind=bas["kind"],
        baseline_slope_per_mhz=float(bas["slope_per_mhz"]),
        baseline_offset=float(bas["offset"]),
        mc_n_samples=int(mc["n_samples"]),
        mc_transition_index=int(mc["transition_index"]),
        seed=int(doc.get("seed", 0)),
        workers=int(workers),
        output_prefix=str(out["prefix"]),
    )
    if cfg.concentration_mm < 0:
        raise ConfigError("ensemble.concentration_mm: must be >= 0")
    if cfg.gamma2_total_mhz <= 0:
        raise ConfigError(
            "sensor.gamma2_nv_mhz + ensemble.gamma2_target_mhz must be > 0")
    cfg.sweep.frequencies()   # validates the grid eagerly
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
