"""Experiment configuration files.

A config is a YAML (or JSON) mapping whose keys mirror
:class:`ExperimentConfig` field names::

    model_P: {kind: unit_sphere, dim: 3}
    model_Q: {kind: shifted_sphere, dim: 3, center: [1, 1, 1]}
    functional: {kind: sliced, n_dirs: 500}
    p: 2
    delta: 0.0
    n_list: [50, 100, 500]
    replications: 500
    bootstrap: {l_exponents: [1, 0.875, 0.8, 0.5], B: 500}
    master_seed: 0
    output_dir: out
    theoretical_variance: 0.832      # optional, variance of the Gaussian limit
    reference: auto                  # auto | analytic | plugin | <number>

Functional entries:

- ``{kind: sliced, n_dirs: K}``: Monte-Carlo directions, drawn once per experiment
- ``{kind: discrete, dirs: [[...], ...]}`` or ``{kind: discrete, n_grid: K}``
- ``{kind: amplitude, dirs: [...]}`` or ``{kind: amplitude, n_grid: K}``
- ``{kind: max_sliced, restarts: 8, max_iter: 500, step0: 0.5, tol: 1e-7}``
- ``{kind: distributional, family: [{dirs: [...], weights: [...]}, ...]}``

``n_grid`` builds a deterministic spherical Fibonacci grid in ``d = 3`` (a
seeded random grid otherwise).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .samplers import Marginal, ModelSpec
from .sliced import Functional, MaxSlicedOptions, random_directions


@dataclass(frozen=True)
class BootstrapConfig:
    l_exponents: tuple = (1.0, 0.875, 0.8, 0.5)
    B: int = 500

    def __post_init__(self):
        if not self.l_exponents:
            raise ConfigError("bootstrap.l_exponents is empty")
        if any(not 0 < b <= 1 for b in self.l_exponents):
            raise ConfigError("bootstrap exponents must lie in (0, 1]")
        if self.B < 1:
            raise ConfigError("bootstrap.B must be >= 1")

    def resample_sizes(self, n: int) -> list[int]:
        return [min(n, max(1, math.ceil(n**b - 1e-9))) for b in self.l_exponents]


@dataclass(frozen=True)
class ExperimentConfig:
    model_P: ModelSpec
    model_Q: ModelSpec
    functional: Functional
    p: float = 2.0
    delta: float = 0.0
    n_list: tuple = (100,)
    replications: int = 100
    bootstrap: BootstrapConfig | None = None
    master_seed: int = 0
    output_dir: str = "out"
    theoretical_variance: float | None = None
    reference: object = "auto"
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.n_list:
            raise ConfigError("n_list must be nonempty")
        if any(int(n) < 1 for n in self.n_list):
            raise ConfigError("sample sizes must be positive")
        if self.model_P.dim != self.model_Q.dim:
            raise ConfigError("model_P and model_Q have different dimensions")
        if self.p < 1:
            raise ConfigError("p must be >= 1")
        if not 0 <= self.delta < 0.5:
            raise ConfigError("delta must lie in [0, 1/2)")
        if self.theoretical_variance is not None and self.theoretical_variance <= 0:
            raise ConfigError("theoretical_variance must be positive")
        if isinstance(self.reference, str) and self.reference not in ("auto", "analytic", "plugin"):
            raise ConfigError(f"unknown reference mode {self.reference!r}")

    @property
    def dim(self) -> int:
        return self.model_P.dim


def fibonacci_directions(n: int) -> np.ndarray:
    """Deterministic near-uniform grid of ``n`` points on S^2."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z**2)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def direction_grid(d: int, n: int, seed: int = 0) -> np.ndarray:
    if d == 3:
        return fibonacci_directions(n)
    return random_directions(d, n, seed)


def _dirs(raw, d: int, seed: int) -> np.ndarray:
    if "dirs" in raw:
        U = np.asarray(raw["dirs"], dtype=np.float64)
        return U / np.linalg.norm(U, axis=1, keepdims=True)
    if "n_grid" in raw:
        return direction_grid(d, int(raw["n_grid"]), seed)
    raise ConfigError("functional needs 'dirs' or 'n_grid'")


def parse_model(raw: dict) -> ModelSpec:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError("model entries need a 'kind'")
    raw = dict(raw)
    for key in ("center", "semi_axes", "spike"):
        if key in raw and raw[key] is not None:
            raw[key] = tuple(float(x) for x in raw[key])
    if "marginal" in raw and isinstance(raw["marginal"], dict):
        raw["marginal"] = Marginal(**raw["marginal"])
    known = {f.name for f in fields(ModelSpec)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")
    return ModelSpec(**raw)


def parse_functional(raw, d: int, seed: int = 0) -> Functional:
    if isinstance(raw, str):
        raw = {"kind": raw}
    kind = raw.get("kind")
    if kind == "sliced":
        return Functional("sliced", n_dirs=int(raw.get("n_dirs", 500)))
    if kind in ("discrete", "amplitude"):
        return Functional(kind, dirs=_dirs(raw, d, seed))
    if kind == "max_sliced":
        opts = {k: raw[k] for k in ("restarts", "max_iter", "step0", "tol", "n_probes") if k in raw}
        return Functional("max_sliced", options=MaxSlicedOptions(**opts))
    if kind == "distributional":
        fam = []
        for member in raw.get("family", []):
            U = np.asarray(member["dirs"], dtype=np.float64)
            U = U / np.linalg.norm(U, axis=1, keepdims=True)
            w = np.asarray(member.get("weights", np.full(len(U), 1.0 / len(U))), dtype=np.float64)
            fam.append((U, w))
        if not fam:
            raise ConfigError("distributional functional needs a nonempty family")
        return Functional("distributional", family=tuple(fam))
    raise ConfigError(f"unknown functional kind {kind!r}")


def config_from_dict(raw: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)} - {"raw"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("model_P", "model_Q", "functional"):
        if key not in raw:
            raise ConfigError(f"config is missing {key!r}")
    model_P = parse_model(raw["model_P"])
    model_Q = parse_model(raw["model_Q"])
    boot = raw.get("bootstrap")
    if boot is not None:
        boot = BootstrapConfig(
            l_exponents=tuple(float(b) for b in boot.get("l_exponents", BootstrapConfig.l_exponents)),
            B=int(boot.get("B", BootstrapConfig.B)),
        )
    seed = int(raw.get("master_seed", 0))
    ref = raw.get("reference", "auto")
    if not isinstance(ref, str):
        ref = float(ref)
    tv = raw.get("theoretical_variance")
    return ExperimentConfig(
        model_P=model_P,
        model_Q=model_Q,
        functional=parse_functional(raw["functional"], model_P.dim, seed),
        p=float(raw.get("p", 2.0)),
        delta=float(raw.get("delta", 0.0)),
        n_list=tuple(int(n) for n in raw.get("n_list", (100,))),
        replications=int(raw.get("replications", 100)),
        bootstrap=boot,
        master_seed=seed,
        output_dir=str(raw.get("output_dir", "out")),
        theoretical_variance=None if tv is None else float(tv),
        reference=ref,
        raw=dict(raw),
    )


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict):
        raise ConfigError("config file must contain a mapping")
    return config_from_dict(raw)


def config_echo(cfg: ExperimentConfig) -> dict:
    """JSON-ready echo of the config, with overrides applied.

    ``output_dir`` is left out so that reruns into different directories
    produce identical files.
    """
    out = dict(cfg.raw)
    out.pop("output_dir", None)
    out["master_seed"] = cfg.master_seed
    out.setdefault("model_P", asdict(cfg.model_P))
    out.setdefault("model_Q", asdict(cfg.model_Q))
    return out
