"""Shared plumbing for the optimizers: evaluation counting, specs and run records."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..ansatz import AnsatzParams
from ..errors import BudgetExhausted

METHODS = ("NM", "GA", "PS", "SA", "CMA")
DEFAULT_BUDGET = 50_000


@dataclass(frozen=True)
class OptimizerSpec:
    """What to run and how.

    ``method_params`` overrides the per-method defaults (see
    :data:`sta_separation.optimizers.DEFAULTS`).
    """

    method: str
    dims: int = 3
    method_params: dict = field(default_factory=dict)
    rng_seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.dims not in (2, 3):
            raise ValueError("dims must be 2 (a12 fixed to 0) or 3")
        if self.budget <= 0:
            raise ValueError("budget must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerSpec":
        return cls(
            method=str(data["method"]).upper(),
            dims=int(data.get("dims", 3)),
            method_params=dict(data.get("method_params", {})),
            rng_seed=int(data.get("rng_seed", 0)),
            budget=int(data.get("budget", DEFAULT_BUDGET)),
        )


class Evaluator:
    """Objective wrapper that counts calls, enforces the budget and tracks the best point.

    The wrapped objective is divided by ``scale`` before the optimizer sees
    it; ``best_raw`` keeps the unscaled value.
    """

    def __init__(self, fun, dims: int, budget: int, scale: float = 1.0):
        self.fun = fun
        self.dims = dims
        self.budget = budget
        self.scale = scale
        self.count = 0
        self.best_x = None
        self.best_value = math.inf
        self.best_raw = math.inf
        self.history: list[tuple[int, float]] = []

    def __call__(self, x) -> float:
        if self.count >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} evaluations used")
        x = np.array(x, dtype=float).reshape(self.dims)
        self.count += 1
        raw = float(self.fun(x))
        value = raw / self.scale if math.isfinite(raw) else math.inf
        if value < self.best_value:
            self.best_value, self.best_raw, self.best_x = value, raw, x.copy()
            self.history.append((self.count, raw))
        return value

    def batch(self, xs) -> np.ndarray:
        return np.array([self(x) for x in xs])

    @property
    def remaining(self) -> int:
        return self.budget - self.count


@dataclass(frozen=True)
class OptimizerRun:
    method: str
    t_final: float
    best_params: AnsatzParams
    best_value: float
    n_evals: int
    history: tuple
    converged: bool
    rng_seed: int = 0
    stream: int = 0
    dims: int = 3
    message: str = ""
    method_params: dict = field(default_factory=dict)

    @property
    def free(self) -> np.ndarray:
        return self.best_params.free[: self.dims]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["history"] = [list(h) for h in self.history]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerRun":
        d = dict(d)
        d["best_params"] = AnsatzParams(**d["best_params"])
        d["history"] = tuple(tuple(h) for h in d.get("history", ()))
        return cls(**d)


@dataclass(frozen=True)
class CloudEntry:
    method: str
    t_final: float
    a10: float
    a11: float
    a12: float
    e_exc: float

    @property
    def point(self) -> np.ndarray:
        return np.array([self.a10, self.a11, self.a12])


@dataclass
class SolutionCloud:
    """Optimized solutions of all methods and final times."""

    entries: list = field(default_factory=list)

    def add(self, run: OptimizerRun, e_exc: float = math.nan) -> None:
        p = run.best_params
        self.entries.append(CloudEntry(run.method, run.t_final, p.a10, p.a11, p.a12, float(e_exc)))

    def points(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, 3))
        return np.array([e.point for e in self.entries])

    def for_time(self, t_final: float, rel: float = 1e-9) -> list:
        return [e for e in self.entries if abs(e.t_final - t_final) <= rel * abs(t_final)]

    def times(self) -> list:
        return sorted({e.t_final for e in self.entries})

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(e)) + "\n" for e in self.entries)

    @classmethod
    def from_records(cls, records) -> "SolutionCloud":
        return cls([CloudEntry(**{k: r[k] for k in CloudEntry.__dataclass_fields__}) for r in records])

    def __len__(self) -> int:
        return len(self.entries)
