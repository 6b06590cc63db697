"""Experiment configuration files and run artifacts.

Configuration is TOML.  Every artifact carries the hash of the resolved
configuration and the tool version: JSON records as fields, CSV files as a
leading ``#`` comment line.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .core import AMU, DEFAULT_OMEGA0, PhysicalConfig, coulomb_constant
from .cost import DEFAULT_SENTINEL, ObjectiveSpec
from .errors import ConfigError
from .optimizers import METHODS, OptimizerSpec

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

DEFAULT_T_GRID = (3.20e-6, 3.43e-6, 3.66e-6, 3.91e-6, 4.17e-6, 4.42e-6, 4.68e-6)
LINE_T_GRID = (3.20e-6, 3.66e-6, 4.17e-6, 4.68e-6)
DEFAULT_SIGMAS = (0.001, 0.002, 0.004, 0.008)


def tool_version() -> str:
    from . import __version__

    return __version__


@dataclass(frozen=True)
class LineSearchConfig:
    n_nu: int = 161
    extension: float = 0.5
    nu_grid: tuple | None = None
    jump_factor: float = 10.0
    trim: float = 0.0
    t_grid: tuple = LINE_T_GRID
    budget: int = 20_000


@dataclass(frozen=True)
class NoiseConfig:
    sigmas: tuple = DEFAULT_SIGMAS
    n_draws: int = 100
    per_sample: bool = False
    comparable_ratio: float = 0.9


@dataclass(frozen=True)
class ExperimentConfig:
    physical: PhysicalConfig = field(default_factory=PhysicalConfig)
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    t_grid: tuple = DEFAULT_T_GRID
    methods: tuple = ()
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    output_dir: str = "out"
    master_seed: int = 0
    n_samples: int = 2001
    dims: int = 3

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ConfigError("t_grid must be strictly ascending")

    def to_dict(self) -> dict:
        d = {
            "physical": self.physical.to_dict(),
            "objective": asdict(self.objective),
            "t_grid": list(self.t_grid),
            "methods": [m.to_dict() for m in self.methods],
            "line_search": asdict(self.line_search),
            "noise": asdict(self.noise),
            "output_dir": self.output_dir,
            "master_seed": self.master_seed,
            "n_samples": self.n_samples,
            "dims": self.dims,
        }
        return json.loads(json.dumps(d))

    def hash(self) -> str:
        """SHA-256 (first 16 hex digits) of the canonical JSON form, output_dir excluded."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, seed=None, mode=None, out=None) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            methods = tuple(replace(m, rng_seed=int(seed)) if m.rng_seed == self.master_seed else m for m in self.methods)
            cfg = replace(cfg, master_seed=int(seed), methods=methods)
        if mode is not None:
            cfg = replace(cfg, objective=replace(cfg.objective, mode=mode))
        if out is not None:
            cfg = replace(cfg, output_dir=str(out))
        return cfg

    def provenance(self) -> dict:
        return {"config_hash": self.hash(), "tool_version": tool_version(), "master_seed": self.master_seed}


# --- parsing -----------------------------------------------------------------------


def _floats(values, name) -> tuple:
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a list of numbers") from exc
    if not all(math.isfinite(v) for v in out):
        raise ConfigError(f"{name} must be finite")
    return out


def _physical(block: dict) -> PhysicalConfig:
    known = {"ion_mass", "ion_mass_amu", "omega0", "t_final", "distance_ratio", "alpha_final_ratio", "coulomb_const"}
    unknown = set(block) - known
    if unknown:
        raise ConfigError(f"unknown [physical] keys: {sorted(unknown)}")
    kw = {}
    if "ion_mass_amu" in block:
        kw["ion_mass"] = float(block["ion_mass_amu"]) * AMU
    if "ion_mass" in block:
        kw["ion_mass"] = float(block["ion_mass"])
    for key in ("omega0", "t_final", "distance_ratio", "alpha_final_ratio", "coulomb_const"):
        if key in block:
            kw[key] = float(block[key])
    kw.setdefault("omega0", DEFAULT_OMEGA0)
    kw.setdefault("coulomb_const", coulomb_constant())
    return PhysicalConfig(**kw)


def _objective(block: dict) -> ObjectiveSpec:
    return ObjectiveSpec(
        mode=str(block.get("mode", "harmonic")),
        epsilon=float(block.get("epsilon", 1e-8)),
        n_quantum=int(block.get("n_quantum", 0)),
        sentinel=float(block.get("sentinel", DEFAULT_SENTINEL)),
    )


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from parsed TOML; raises :class:`ConfigError`."""
    try:
        seed = int(data.get("master_seed", 0))
        dims = int(data.get("dims", 3))
        methods = []
        for block in data.get("methods", [{"method": m} for m in METHODS]):
            block = dict(block)
            block.setdefault("rng_seed", seed)
            block.setdefault("dims", dims)
            methods.append(OptimizerSpec.from_dict(block))
        ls = dict(data.get("line_search", {}))
        if "nu_grid" in ls:
            ls["nu_grid"] = _floats(ls["nu_grid"], "line_search.nu_grid")
        if "t_grid" in ls:
            ls["t_grid"] = _floats(ls["t_grid"], "line_search.t_grid")
        nz = dict(data.get("noise", {}))
        if "sigmas" in nz:
            nz["sigmas"] = _floats(nz["sigmas"], "noise.sigmas")
        return ExperimentConfig(
            physical=_physical(dict(data.get("physical", {}))),
            objective=_objective(dict(data.get("objective", {}))),
            t_grid=_floats(data.get("t_grid", DEFAULT_T_GRID), "t_grid"),
            methods=tuple(methods),
            line_search=LineSearchConfig(**ls),
            noise=NoiseConfig(**nz),
            output_dir=str(data.get("output_dir", "out")),
            master_seed=seed,
            n_samples=int(data.get("n_samples", 2001)),
            dims=dims,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        return config_from_dict({})
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(data)


# --- parameter files ---------------------------------------------------------------


@dataclass(frozen=True)
class ParamsFile:
    a10: float
    a11: float
    a12: float
    t_final: float | None = None
    label: str = ""

    @property
    def free(self) -> tuple:
        return (self.a10, self.a11, self.a12)


def read_params(path) -> ParamsFile:
    """Read ``{"a10": .., "a11": .., "a12": .., "t_final": .., "label": ..}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
        a = [float(data[k]) for k in ("a10", "a11", "a12")]
        t_f = data.get("t_final")
        t_f = None if t_f is None else float(t_f)
    except FileNotFoundError as exc:
        raise ConfigError(f"params file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"malformed params file {path}: {exc!r}") from exc
    if not all(math.isfinite(v) for v in a) or (t_f is not None and not t_f > 0):
        raise ConfigError(f"malformed params file {path}: non-finite coefficients or bad t_final")
    return ParamsFile(*a, t_final=t_f, label=str(data.get("label", path.stem)))


def write_params(path, free, t_final=None, label="", provenance=None) -> None:
    rec = {"a10": float(free[0]), "a11": float(free[1]), "a12": float(free[2])}
    if t_final is not None:
        rec["t_final"] = float(t_final)
    rec["label"] = label
    rec.update(provenance or {})
    Path(path).write_text(json.dumps(rec, indent=2) + "\n")


# --- artifact writers --------------------------------------------------------------


def write_jsonl(path, records, provenance: dict) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps({**provenance, **rec}) + "\n")


def read_jsonl(path) -> list:
    try:
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON-lines file {path}: {exc}") from exc


def write_json(path, record, provenance: dict) -> None:
    Path(path).write_text(json.dumps({**provenance, **record}, indent=2) + "\n")


def csv_text(header, rows, provenance: dict) -> str:
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in provenance.items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, provenance: dict) -> None:
    Path(path).write_text(csv_text(header, rows, provenance))


def read_csv(path) -> tuple:
    """Return ``(provenance, header, rows)`` of a CSV written by :func:`write_csv`."""
    lines = Path(path).read_text().splitlines()
    prov = dict(item.split("=", 1) for item in lines[0][2:].split()) if lines and lines[0].startswith("#") else {}
    body = lines[1:] if prov else lines
    reader = list(csv.reader(body))
    return prov, reader[0], reader[1:]


def write_waveforms(path, waveforms, provenance: dict) -> None:
    rows = zip(waveforms.grid.tolist(), waveforms.alpha_series.tolist(), waveforms.beta_series.tolist(), waveforms.d_series.tolist())
    write_csv(path, ("t", "alpha", "beta", "d"), rows, provenance)
