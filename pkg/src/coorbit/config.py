"""Run configuration documents."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import CoorbitError, SpecError
from .gallery import FrameSpec, WeightSpec
from .report import DEFAULT_TOLERANCES, SUITES
from .serialize import SCHEMA_VERSION, SchemaError, read_json


class ConfigError(CoorbitError, ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    frames: list = field(default_factory=list)  # FrameSpec or Path to a frame document
    weights: list = field(default_factory=lambda: [WeightSpec()])
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    suites: tuple = SUITES
    seed: int = 0
    samples: int = 100
    probes: int = 1000
    perturb: float = 0.0
    out: Path = Path("out")
    converge: dict = field(default_factory=dict)
    sizes: list = field(default_factory=list)
    source: dict = field(default_factory=dict)

    @classmethod
    def from_doc(cls, doc: dict, base_dir=None) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        version = doc.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r}")
        known = {"schema_version", "frames", "weights", "tolerances", "suites", "seed", "samples",
                 "probes", "perturb", "out", "converge", "sizes"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")
        base_dir = Path(base_dir or ".")
        cfg = cls(source=doc)
        try:
            for entry in doc.get("frames", []):
                if isinstance(entry, dict) and "path" in entry:
                    cfg.frames.append(base_dir / entry["path"])
                else:
                    cfg.frames.append(FrameSpec.from_dict(entry))
            if "weights" in doc:
                cfg.weights = [WeightSpec.from_dict(w) for w in doc["weights"]]
        except (SpecError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        tols = doc.get("tolerances", {})
        unknown = set(tols) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerances {sorted(unknown)}")
        cfg.tolerances.update({k: float(v) for k, v in tols.items()})
        suites = tuple(doc.get("suites", SUITES))
        bad = [s for s in suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {list(SUITES)}")
        cfg.suites = suites
        cfg.seed = int(doc.get("seed", 0))
        cfg.samples = int(doc.get("samples", 100))
        cfg.probes = int(doc.get("probes", 1000))
        cfg.perturb = float(doc.get("perturb", 0.0))
        cfg.out = Path(doc.get("out", "out"))
        cfg.converge = dict(doc.get("converge", {}))
        cfg.sizes = [int(n) for n in doc.get("sizes", [])]
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = read_json(path)
        except SchemaError as exc:
            raise ConfigError(str(exc)) from None
        return cls.from_doc(doc, base_dir=path.parent)

    def validate(self):
        for name, tol in self.tolerances.items():
            if not tol > 0:
                raise ConfigError(f"tolerance {name} must be positive, got {tol}")
        if self.samples < 1 or self.probes < 1:
            raise ConfigError("samples and probes must be >= 1")
        if self.perturb < 0:
            raise ConfigError("perturb must be >= 0")
        if not self.weights:
            raise ConfigError("at least one weight is required")
