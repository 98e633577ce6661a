"""JSON run configuration: parsing, validation, presets and canonical form.

Keys carry their SI unit as a suffix (``tau_s``, ``mass_a_kg``,
``delta_x_m``); angles are ``_rad``.  Unknown keys are rejected, and a known
quantity written with the wrong suffix gets its own error.  Every error
names the offending key path, e.g. ``experiment.mass_a_kg``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .decoherence import DecoherenceModel
from .entanglement import DISTANCE_MODES, GEOMETRIES, ExperimentConfig
from .errors import ConfigError, GsgError
from .optimizer import FAMILIES, OBJECTIVES, StateFamilySpec
from .spin_states import check_spin

PRESETS = {
    "paper-2017-screened": {
        "experiment": {"tau_s": 2.0, "mass_a_kg": 1e-14, "mass_b_kg": 1e-14, "delta_x_m": 2.5e-4, "delta_s_m": 5e-5},
    },
}

SECTIONS = ("preset", "experiment", "family", "decoherence", "run")


@dataclass(frozen=True)
class Field:
    key: str  # canonical key with unit suffix
    attr: str  # attribute on the target object
    kind: str  # float, nonneg, pos, int, bool, str, spin, list, pair, optfloat, optint
    choices: tuple = ()


def _stem(key: str) -> str:
    for suffix in ("_hz_per_m2", "_rad_per_s", "_kg_per_m3", "_rad", "_kg", "_hz", "_m", "_s"):
        if key.endswith(suffix):
            return key[: -len(suffix)]
    return key


EXPERIMENT_FIELDS = (
    Field("geometry", "geometry", "str", GEOMETRIES),
    Field("j", "j", "spin"),
    Field("mass_a_kg", "mass_a", "pos"),
    Field("mass_b_kg", "mass_b", "pos"),
    Field("delta_x_m", "delta_x", "nonneg"),
    Field("delta_s_m", "delta_s", "pos"),
    Field("tau_s", "tau", "nonneg"),
    Field("k", "k", "float"),
    Field("distance_mode", "distance_mode", "str", DISTANCE_MODES),
)
EXPERIMENT_REQUIRED = ("mass_a_kg", "mass_b_kg", "delta_x_m", "delta_s_m", "tau_s")

FAMILY_FIELDS = (
    Field("family", "family", "str", FAMILIES),
    Field("theta_rad", "theta", "optfloat"),
    Field("phi_rad", "phi", "float"),
    Field("chi_range", "chi_range", "pair"),
    Field("delta_theta_range_rad", "delta_theta_range", "pair"),
    Field("delta_phi_range_rad", "delta_phi_range", "pair"),
    Field("delta_phi_free", "delta_phi_free", "bool"),
    Field("theta0_rad", "theta0", "float"),
)

DECOHERENCE_FIELDS = (
    Field("gamma_short_hz", "gamma_short", "nonneg"),
    Field("gamma_long_hz_per_m2", "gamma_long", "nonneg"),
)


@dataclass(frozen=True)
class RunOptions:
    """Subcommand knobs; each subcommand reads the ones it needs."""

    objective: str = "entropy"
    grid_n: int | None = None
    refine: bool = True
    j_list: tuple = (0.5, 2.0, 5.0, 10.0)
    tau_grid_s: tuple | None = None  # None: 21 points on [0, tau]
    surface_grid_n: int = 101
    short_rate_grid_hz: tuple = (0.0, 0.05, 0.1, 0.25, 0.5)
    long_rate_grid_hz_per_m2: tuple = (0.0, 1.6e6, 3.2e6, 8e6, 1.6e7)
    decoherence_grid_n: int = 41
    chi: float = 0.0  # single-point subcommands: squeezing strength
    delta_theta_rad: float = 0.0  # single-point subcommands: superposition offsets
    delta_phi_rad: float = 0.0
    n_theta: int = 91
    n_phi: int = 180
    trap_mass_kg: float = 1e-14
    trap_omega_rad_per_s: float = 1.0
    coupling_k: float = 2.0
    lande_g: float = 2.0
    n_x: int = 4001
    t_over_ts: tuple = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
    oracle_j_list: tuple = (0.5, 1.0, 2.0)
    oracle_k_list: tuple = (0.05, 0.2)
    oracle_t_over_ts: tuple = (0.5, 1.0, 2.0)
    sphere_density_kg_per_m3: float = 3500.0
    sphere_permittivity: float = 5.7


RUN_FIELDS = (
    Field("objective", "objective", "str", OBJECTIVES),
    Field("grid_n", "grid_n", "optint"),
    Field("refine", "refine", "bool"),
    Field("j_list", "j_list", "spinlist"),
    Field("tau_grid_s", "tau_grid_s", "optlist"),
    Field("surface_grid_n", "surface_grid_n", "int"),
    Field("short_rate_grid_hz", "short_rate_grid_hz", "list"),
    Field("long_rate_grid_hz_per_m2", "long_rate_grid_hz_per_m2", "list"),
    Field("decoherence_grid_n", "decoherence_grid_n", "int"),
    Field("chi", "chi", "float"),
    Field("delta_theta_rad", "delta_theta_rad", "float"),
    Field("delta_phi_rad", "delta_phi_rad", "float"),
    Field("n_theta", "n_theta", "int"),
    Field("n_phi", "n_phi", "int"),
    Field("trap_mass_kg", "trap_mass_kg", "pos"),
    Field("trap_omega_rad_per_s", "trap_omega_rad_per_s", "pos"),
    Field("coupling_k", "coupling_k", "float"),
    Field("lande_g", "lande_g", "pos"),
    Field("n_x", "n_x", "int"),
    Field("t_over_ts", "t_over_ts", "list"),
    Field("oracle_j_list", "oracle_j_list", "spinlist"),
    Field("oracle_k_list", "oracle_k_list", "list"),
    Field("oracle_t_over_ts", "oracle_t_over_ts", "list"),
    Field("sphere_density_kg_per_m3", "sphere_density_kg_per_m3", "pos"),
    Field("sphere_permittivity", "sphere_permittivity", "pos"),
)


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    family: StateFamilySpec = field(default_factory=StateFamilySpec)
    decoherence: DecoherenceModel = field(default_factory=DecoherenceModel)
    run: RunOptions = field(default_factory=RunOptions)
    preset: str | None = None


def _number(path, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    return float(value)


def _convert(path, f: Field, value):
    kind = f.kind
    if kind == "str":
        if value not in f.choices:
            raise ConfigError(path, f"must be one of {list(f.choices)}, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true or false, got {value!r}")
        return value
    if kind in ("int", "optint"):
        if value is None and kind == "optint":
            return None
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(path, f"expected a positive integer, got {value!r}")
        return value
    if kind == "spin":
        try:
            return check_spin(value)
        except GsgError as exc:
            raise ConfigError(path, str(exc)) from None
    if kind == "optfloat":
        return None if value is None else _number(path, value)
    if kind in ("list", "optlist", "spinlist", "pair"):
        if value is None and kind == "optlist":
            return None
        if not isinstance(value, list) or not value:
            raise ConfigError(path, "expected a non-empty list")
        if kind == "spinlist":
            return tuple(_convert(f"{path}[{i}]", Field("", "", "spin"), v) for i, v in enumerate(value))
        out = tuple(_number(f"{path}[{i}]", v) for i, v in enumerate(value))
        if kind == "pair" and len(out) != 2:
            raise ConfigError(path, "expected [low, high]")
        return out
    value = _number(path, value)
    if kind == "pos" and not value > 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    if kind == "nonneg" and value < 0:
        raise ConfigError(path, f"must be non-negative, got {value!r}")
    return value


def _read_section(section: str, raw, table, required=()):
    if not isinstance(raw, dict):
        raise ConfigError(section, "expected an object")
    by_key = {f.key: f for f in table}
    suffixed = [f for f in table if _stem(f.key) != f.key]
    out = {}
    for key, value in raw.items():
        path = f"{section}.{key}"
        f = by_key.get(key)
        if f is None:
            near = next((g for g in suffixed if key == _stem(g.key) or key.startswith(_stem(g.key) + "_")), None)
            if near is not None:
                raise ConfigError(path, f"unit-suffix mismatch, expected key {near.key!r}")
            raise ConfigError(path, "unknown key")
        out[f.attr] = _convert(path, f, value)
    for key in required:
        if by_key[key].attr not in out:
            raise ConfigError(f"{section}.{key}", "missing required key")
    return out


def _build(section, cls, kwargs):
    try:
        return cls(**kwargs)
    except GsgError as exc:
        raise ConfigError(section, str(exc)) from None


def parse_config(source=None, preset: str | None = None) -> RunConfig:
    """Parse a JSON config given as a path, JSON text or an already-loaded dict.

    ``preset`` (or a top-level ``"preset"`` key) supplies defaults that the
    file may override.  With no preset the experiment geometry keys are
    required.
    """
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = source
    else:
        text = source
        if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
            try:
                text = Path(source).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError("<file>", f"cannot read config: {exc}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    for key in raw:
        if key not in SECTIONS:
            raise ConfigError(key, "unknown key")
    name = preset if preset is not None else raw.get("preset")
    base = {}
    if name is not None:
        if name not in PRESETS:
            raise ConfigError("preset", f"unknown preset {name!r}, known: {sorted(PRESETS)}")
        base = PRESETS[name]
    exp_raw = raw.get("experiment", {})
    if not isinstance(exp_raw, dict):
        raise ConfigError("experiment", "expected an object")
    exp_raw = {**base.get("experiment", {}), **exp_raw}
    required = () if name is not None else EXPERIMENT_REQUIRED
    exp = _build("experiment", ExperimentConfig, _read_section("experiment", exp_raw, EXPERIMENT_FIELDS, required))
    fam = _build("family", StateFamilySpec, _read_section("family", raw.get("family", {}), FAMILY_FIELDS))
    deco_kw = _read_section("decoherence", raw.get("decoherence", {}), DECOHERENCE_FIELDS)
    deco = _build("decoherence", DecoherenceModel, dict(delta_x=exp.delta_x, tau=exp.tau, **deco_kw))
    run = _build("run", RunOptions, _read_section("run", raw.get("run", {}), RUN_FIELDS))
    return RunConfig(exp, fam, deco, run, name)


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def to_dict(cfg: RunConfig) -> dict:
    """Canonical, fully explicit form; ``parse_config(to_dict(c)) == c``."""
    out = {}
    if cfg.preset is not None:
        out["preset"] = cfg.preset
    for section, obj, table in (
        ("experiment", cfg.experiment, EXPERIMENT_FIELDS),
        ("family", cfg.family, FAMILY_FIELDS),
        ("decoherence", cfg.decoherence, DECOHERENCE_FIELDS),
        ("run", cfg.run, RUN_FIELDS),
    ):
        out[section] = {f.key: _plain(getattr(obj, f.attr)) for f in table}
    return out


def serialize(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), sort_keys=True, indent=2) + "\n"
