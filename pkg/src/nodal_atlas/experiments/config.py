"""Experiment configuration: JSON documents with a fixed set of fields."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InputError
from ..fem.coefficients import ANALYTIC_PRESETS, CoefficientField, constant, identity
from ..geometry.domain import PlanarDomain
from ..geometry.presets import PRESETS, get_domain

COEFFICIENT_PRESETS = ("identity", "constant-SPD") + ANALYTIC_PRESETS
FIELDS = ("name", "domain", "coefficients", "mesh_h", "mode_count", "radii", "cuboid", "tolerances",
          "output_dir", "seed", "params")


@dataclass
class ExperimentConfig:
    name: str
    domain: object = "unit-square"          # preset name, JSON path, or {"preset": ..., **params}
    coefficients: dict = field(default_factory=lambda: {"preset": "identity", "Lambda": 1.0, "gamma": 0.0})
    mesh_h: float = 0.02
    mode_count: int = 10
    radii: object = None                    # list of radii or {"max": R, "count": n} (dyadic)
    cuboid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output_dir: str = "out"
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    # -- validation ---------------------------------------------------------
    def validate(self):
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError("config 'name' must be a non-empty string")
        self._validate_domain()
        c = self.coefficients
        if not isinstance(c, dict) or c.get("preset", "identity") not in COEFFICIENT_PRESETS:
            raise ConfigError(f"coefficients.preset must be one of {COEFFICIENT_PRESETS}")
        try:
            self.coefficient_field()
        except InputError as exc:
            raise ConfigError(f"invalid coefficients: {exc}") from None
        if not (isinstance(self.mesh_h, (int, float)) and self.mesh_h > 0):
            raise ConfigError("mesh_h must be a positive number")
        if not (isinstance(self.mode_count, int) and self.mode_count >= 1):
            raise ConfigError("mode_count must be a positive integer")
        try:
            self.radius_grid()
        except (InputError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid radii: {exc}") from None
        if not isinstance(self.tolerances, dict):
            raise ConfigError("tolerances must be a map")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigError(f"tolerance {k!r} must be positive")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        if not isinstance(self.params, dict) or not isinstance(self.cuboid, dict):
            raise ConfigError("params and cuboid must be maps")

    def _validate_domain(self):
        d = self.domain
        if isinstance(d, dict):
            if d.get("preset") not in PRESETS:
                raise ConfigError(f"unknown domain preset {d.get('preset')!r}; known: {sorted(PRESETS)}")
        elif isinstance(d, str):
            if d not in PRESETS and not d.endswith(".json"):
                raise ConfigError(f"unknown domain preset {d!r}; known: {sorted(PRESETS)}")
            if d.endswith(".json") and not Path(d).exists():
                raise ConfigError(f"domain file {d!r} not found")
        else:
            raise ConfigError("domain must be a preset name, a JSON path or a preset map")

    # -- builders -------------------------------------------------------------
    def build_domain(self, spacing=None) -> PlanarDomain:
        spacing = self.mesh_h if spacing is None else spacing
        d = self.domain
        try:
            if isinstance(d, dict):
                params = {k: v for k, v in d.items() if k != "preset"}
                return get_domain(d["preset"], spacing=spacing, **params)
            if d.endswith(".json"):
                return PlanarDomain.load(d)
            return get_domain(d, spacing=spacing)
        except InputError as exc:
            raise ConfigError(f"cannot build domain: {exc}") from None

    @property
    def domain_name(self):
        d = self.domain
        return d["preset"] if isinstance(d, dict) else Path(d).stem if d.endswith(".json") else d

    def coefficient_field(self) -> CoefficientField:
        c = dict(self.coefficients)
        preset = c.pop("preset", "identity")
        lam = float(c.pop("Lambda", 1.0))
        gamma = float(c.pop("gamma", 0.0))
        if preset == "identity":
            return identity()
        if preset == "constant-SPD":
            return constant(c["matrix"], lam)
        return CoefficientField("preset-analytic", {"name": preset, **c}, lam, gamma)

    def radius_grid(self):
        r = self.radii
        if r is None:
            return None
        if isinstance(r, dict):
            count = int(r["count"])
            if count < 1:
                raise InputError("radius count must be positive")
            out = float(r["max"]) * 2.0 ** -np.arange(count - 1, -1, -1, dtype=float)
        else:
            out = np.asarray(r, dtype=float)
        if out.ndim != 1 or len(out) == 0 or np.any(out <= 0) or np.any(np.diff(out) <= 0):
            raise InputError("radii must be positive and strictly increasing")
        return out

    def tol(self, key, default):
        return float(self.tolerances.get(key, default))

    def param(self, key, default=None):
        return self.params.get(key, default)

    # -- serialisation --------------------------------------------------------
    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(d) - set(FIELDS))
        if unknown:
            raise ConfigError(f"unknown config fields {unknown}")
        if "name" not in d:
            raise ConfigError("config needs a 'name'")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path):
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data)


def shipped_config_dir() -> Path:
    return Path(__file__).resolve().parent / "configs"


def shipped_config(name) -> ExperimentConfig:
    """Load configs/<name>.json from the package."""
    return ExperimentConfig.load(shipped_config_dir() / f"{name}.json")
