"""Configuration schema, parsing, serialization and the four presets.

The canonical config format is TOML (the only accepted format). Unknown
keys are hard errors; missing keys take the documented defaults, which
reproduce the first preset. See README for the full schema.
"""

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError

_ENTRY_KEYS = ("A1111", "A1122", "A2222", "A1212")


def _default_init():
    # matches the first preset: a double-arrowhead frame whose spine is
    # stiff (set 2 selects the inner half of the strokes) and whose
    # outer shell is the weak phase
    return {
        "set1": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                 "thickness": 0.12},
        "set2": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                 "thickness": 0.05, "invert": True},
    }


@dataclass
class Config:
    # [mesh]
    n: int = 100
    # [phases]
    E: tuple = (0.91, 0.0001, 1.82, 0.0001)
    nu: tuple = (0.3, 0.3, 0.3, 0.3)
    # [target] / [weights]
    target: dict = field(default_factory=lambda: {
        "1111": 0.1, "1122": -0.1, "2222": 0.1})
    weights: dict = field(default_factory=lambda: {
        "1111": 1.0, "1122": 30.0, "2222": 1.0})
    # [volumes]
    volume_targets: tuple = (0.30, 0.0, 0.04, 0.0)
    constrained: tuple = (True, False, True, False)
    mode: str = "plain"
    # [optimizer]
    iterations: int = 200
    snapshot_every: int = 20
    seed: int = 0
    # [numerics]
    eps_mult: float = 2.0
    alpha_mult: float = 4.0
    beta_step: float = 0.1
    beta0: float = 1.0
    beta_growth: float = 1.5
    beta_max: float = 1000.0
    cg_tol: float = 1e-9
    reinit_every: int = 5
    reinit_steps: int = 50
    max_ls_trials: int = 8
    # [init.set1] / [init.set2]
    init: dict = field(default_factory=_default_init)

    def validate(self):
        if self.n < 2 or self.n % 2 != 0:
            raise ConfigError(f"mesh.n must be even and >= 2, got {self.n}")
        if len(self.E) != 4 or len(self.nu) != 4:
            raise ConfigError("phases.E and phases.nu must list 4 values")
        for e, v in zip(self.E, self.nu):
            if e <= 0 or not (-1.0 < v < 0.5):
                raise ConfigError(f"non-physical phase moduli E={e}, nu={v}")
        if set(self.target) != set(self.weights):
            raise ConfigError("target and weights must list the same entries")
        for key in self.target:
            if "A" + key not in _ENTRY_KEYS:
                raise ConfigError(f"unknown tensor entry A{key}")
        if any(w < 0 for w in self.weights.values()) or \
                not any(w > 0 for w in self.weights.values()):
            raise ConfigError("weights must be >= 0 with at least one > 0")
        if len(self.volume_targets) != 4 or len(self.constrained) != 4:
            raise ConfigError("volumes need 4 targets and 4 flags")
        for v in self.volume_targets:
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"volume target {v} outside [0, 1]")
        if self.mode not in ("plain", "augmented"):
            raise ConfigError(f"volumes.mode must be plain|augmented, "
                              f"got {self.mode!r}")
        if self.iterations < 0 or self.snapshot_every < 0:
            raise ConfigError("iterations and snapshot_every must be >= 0")
        for name in ("eps_mult", "alpha_mult", "beta0", "beta_growth",
                     "beta_max", "cg_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"numerics.{name} must be positive")
        if self.beta_step < 0:
            raise ConfigError("numerics.beta_step must be >= 0")
        if self.reinit_every < 1 or self.reinit_steps < 1:
            raise ConfigError("reinit cadence and sub-steps must be >= 1")
        if self.max_ls_trials < 1:
            raise ConfigError("numerics.max_ls_trials must be >= 1")
        for name in ("set1", "set2"):
            if name not in self.init:
                raise ConfigError(f"init.{name} missing")
        return self


_SECTIONS = {
    "mesh": {"n": ("n", int)},
    "phases": {"E": ("E", tuple), "nu": ("nu", tuple)},
    "target": None,   # handled specially
    "weights": None,
    "volumes": {"targets": ("volume_targets", tuple),
                "constrained": ("constrained", tuple),
                "mode": ("mode", str)},
    "optimizer": {"iterations": ("iterations", int),
                  "snapshot_every": ("snapshot_every", int),
                  "seed": ("seed", int)},
    "numerics": {k: (k, float) for k in
                 ("eps_mult", "alpha_mult", "beta_step", "beta0",
                  "beta_growth", "beta_max", "cg_tol")} |
                {"reinit_every": ("reinit_every", int),
                 "reinit_steps": ("reinit_steps", int),
                 "max_ls_trials": ("max_ls_trials", int)},
    "init": None,
}

_INIT_KEYS = {"pattern", "rows", "cols", "radius", "invert", "radii",
              "cells", "thickness", "hinge", "apex", "path", "key"}


def parse_config(text):
    """Parse and fully validate a TOML config document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    cfg = Config()
    for section, content in doc.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"[{section}] must be a table")
        if section in ("target", "weights"):
            entries = {}
            for key, val in content.items():
                if key not in _ENTRY_KEYS:
                    raise ConfigError(f"unknown key {section}.{key}")
                entries[key[1:]] = float(val)
            setattr(cfg, "target" if section == "target" else "weights",
                    entries)
            continue
        if section == "init":
            init = {}
            for name, sub in content.items():
                if name not in ("set1", "set2"):
                    raise ConfigError(f"unknown key init.{name}")
                if not isinstance(sub, dict):
                    raise ConfigError(f"init.{name} must be a table")
                for key in sub:
                    if key not in _INIT_KEYS:
                        raise ConfigError(f"unknown key init.{name}.{key}")
                init[name] = dict(sub)
            merged = _default_init()
            merged.update(init)
            cfg.init = merged
            continue
        mapping = _SECTIONS[section]
        for key, val in content.items():
            if key not in mapping:
                raise ConfigError(f"unknown key {section}.{key}")
            attr, cast = mapping[key]
            setattr(cfg, attr, cast(val))
    return cfg.validate()


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize {v!r}")


def serialize_config(cfg):
    """Emit the fully resolved config (defaults included) as TOML."""
    lines = []

    def section(name, pairs):
        lines.append(f"[{name}]")
        for k, v in pairs:
            lines.append(f"{k} = {_toml_value(v)}")
        lines.append("")

    section("mesh", [("n", cfg.n)])
    section("phases", [("E", list(cfg.E)), ("nu", list(cfg.nu))])
    section("target", [("A" + k, cfg.target[k]) for k in sorted(cfg.target)])
    section("weights", [("A" + k, cfg.weights[k])
                        for k in sorted(cfg.weights)])
    section("volumes", [("targets", list(cfg.volume_targets)),
                        ("constrained", list(cfg.constrained)),
                        ("mode", cfg.mode)])
    section("optimizer", [("iterations", cfg.iterations),
                          ("snapshot_every", cfg.snapshot_every),
                          ("seed", cfg.seed)])
    section("numerics", [(k, getattr(cfg, k)) for k in
                         ("eps_mult", "alpha_mult", "beta_step", "beta0",
                          "beta_growth", "beta_max", "cg_tol",
                          "reinit_every", "reinit_steps", "max_ls_trials")])
    for name in ("set1", "set2"):
        section(f"init.{name}",
                [(k, v) for k, v in sorted(cfg.init[name].items())])
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# presets: the four published example runs

PRESETS = {
    "example1": {
        "weights": {"1111": 1.0, "1122": 30.0, "2222": 1.0},
        "target": {"1111": 0.1, "1122": -0.1, "2222": 0.1},
        "volume_targets": (0.30, 0.0, 0.04, 0.0),
        "mode": "plain",
        "init": {
            "set1": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                     "thickness": 0.12},
            "set2": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                     "thickness": 0.05, "invert": True},
        },
    },
    "example2": {
        "weights": {"1111": 1.0, "1122": 30.0, "2222": 1.0},
        "target": {"1111": 0.1, "1122": -0.1, "2222": 0.1},
        "volume_targets": (0.33, 0.0, 0.01, 0.0),
        "mode": "plain",
        "init": {
            "set1": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                     "thickness": 0.12},
            "set2": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                     "thickness": 0.03, "invert": True},
        },
    },
    "example3": {
        "weights": {"1111": 1.0, "1122": 10.0, "2222": 1.0},
        "target": {"1111": 0.2, "1122": -0.1, "2222": 0.2},
        "volume_targets": (0.385, 0.0, 0.0965, 0.0),
        "mode": "augmented",
        "init": {
            "set1": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                     "thickness": 0.15},
            "set2": {"pattern": "arrows", "rows": 1, "apex": 0.3,
                     "thickness": 0.05, "invert": True},
        },
    },
    "example4": {
        "weights": {"1111": 1.0, "1122": 10.0, "2222": 1.0},
        "target": {"1111": 0.2, "1122": -0.1, "2222": 0.2},
        "volume_targets": (0.53, 0.0, 0.07, 0.0),
        "mode": "augmented",
        "init": {
            "set1": {"pattern": "arrows", "rows": 2, "apex": 0.3,
                     "thickness": 0.1},
            "set2": {"pattern": "arrows", "rows": 2, "apex": 0.3,
                     "thickness": 0.04, "invert": True},
        },
    },
}


def preset_config(name):
    """Config for one of the published example runs."""
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    cfg = Config()
    for key, val in PRESETS[name].items():
        setattr(cfg, key, val)
    return cfg.validate()
