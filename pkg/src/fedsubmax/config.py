"""Experiment configuration (JSON) and its validation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SyntheticSpec(_Strict):
    n: int = Field(ge=1)
    N: int = Field(ge=1)
    density: float = Field(0.3, ge=0.0, le=1.0)
    score_range: Tuple[float, float] = (0.0, 1.0)
    seed: Optional[int] = None

    @field_validator("score_range")
    @classmethod
    def _range(cls, v):
        if not 0 <= v[0] <= v[1]:
            raise ValueError("score_range must satisfy 0 <= low <= high")
        return v


class ObjectiveSpec(_Strict):
    kind: Literal["coverage", "facility"]
    data: Optional[str] = None
    groups: Optional[List[List[int]]] = None
    num_clients: Optional[int] = Field(None, ge=1)
    scores: Optional[List[List[float]]] = None
    synthetic: Optional[SyntheticSpec] = None
    weights: Union[Literal["uniform"], List[float]] = "uniform"

    @model_validator(mode="after")
    def _one_source(self):
        inline = self.groups if self.kind == "coverage" else self.scores
        sources = [s for s in (self.data, inline, self.synthetic) if s is not None]
        if len(sources) != 1:
            field = "groups" if self.kind == "coverage" else "scores"
            raise ValueError(f"exactly one of data, {field}, synthetic must be given")
        if self.kind == "coverage" and self.scores is not None:
            raise ValueError("scores only apply to facility objectives")
        if self.kind == "facility" and self.groups is not None:
            raise ValueError("groups only apply to coverage objectives")
        return self


class MatroidSpec(_Strict):
    kind: Literal["uniform", "partition"]
    k: Optional[int] = Field(None, ge=0)
    blocks: Optional[List[List[int]]] = None
    caps: Optional[List[int]] = None

    @model_validator(mode="after")
    def _fields(self):
        if self.kind == "uniform":
            if self.k is None or self.blocks is not None or self.caps is not None:
                raise ValueError("uniform matroids take exactly the field k")
        else:
            if self.blocks is None or self.caps is None or self.k is not None:
                raise ValueError("partition matroids take exactly the fields blocks and caps")
            if len(self.blocks) != len(self.caps):
                raise ValueError("one cap per block")
        return self

    def as_dict(self) -> dict:
        return self.model_dump(exclude_none=True)


class Params(_Strict):
    T: int = Field(100, ge=1)
    eta: Optional[float] = Field(None, gt=0.0, le=1.0)
    K: int = Field(1, ge=1)
    tau: int = Field(1, ge=1)
    sigma: float = Field(0.2, gt=0.0, lt=1.0)
    delta: float = Field(0.1, gt=0.0, lt=1.0)
    epsilon: float = Field(0.2, gt=0.0, lt=1.0)
    kappa_override: Optional[float] = Field(None, gt=0.0)
    gradient_mode: Literal["exact", "estimated"] = "exact"
    m: Optional[int] = Field(None, ge=1)
    participation: Literal["sampled", "full"] = "sampled"
    payload: Literal["direction", "gradient"] = "direction"
    aggregator: Literal["plain", "masked"] = "plain"
    bits_per_coord: int = Field(64, ge=1)
    diagnostics: bool = True


class ExperimentConfig(_Strict):
    objective: ObjectiveSpec
    matroid: MatroidSpec
    algorithm: Literal["fedcg", "fedcg-plus", "fed-discrete", "central-cg", "central-greedy", "brute"]
    params: Params = Field(default_factory=Params)
    seed: int = Field(0, ge=0, lt=2**64)
    output: Optional[str] = None


def _check_algorithm_params(cfg: ExperimentConfig) -> None:
    p = cfg.params
    if cfg.algorithm == "fedcg-plus":
        if p.T % p.tau:
            raise ConfigError(f"params.tau: tau={p.tau} must divide T={p.T}", field="params.tau")
        eta = p.eta if p.eta is not None else p.tau / p.T
        if eta * p.T / p.tau > 1 + 1e-12:
            raise ConfigError("params.eta: eta * (T / tau) must not exceed 1", field="params.eta")
    if cfg.algorithm in ("fedcg", "central-cg"):
        eta = p.eta if p.eta is not None else 1.0 / p.T
        if eta * p.T > 1 + 1e-12:
            raise ConfigError("params.eta: eta * T must not exceed 1", field="params.eta")
        if cfg.algorithm == "fedcg" and p.payload == "gradient" and p.participation != "full":
            raise ConfigError("params.payload: gradient payloads need full participation", field="params.payload")
        if p.gradient_mode == "estimated" and p.m is None:
            raise ConfigError("params.m: estimated gradients need a sample count m", field="params.m")


def parse_config(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        field = ".".join(str(x) for x in err["loc"])
        raise ConfigError(f"{field or '<root>'}: {err['msg']}", field=field or None) from None
    _check_algorithm_params(cfg)
    if cfg.objective.data is not None:
        path = Path(cfg.objective.data)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        if not path.is_file():
            raise ConfigError(f"data file not found: {path}", field="objective.data")
        cfg.objective.data = str(path)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", field=None) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(raw, base_dir=path.parent)
