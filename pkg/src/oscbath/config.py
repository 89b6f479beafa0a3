"""Run configuration: a single JSON document, validated strictly."""
from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .bath import BathSpec, SpectralFamily
from .coeffs import ConfigError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SpectralConfig(_Strict):
    variant: Literal["drude", "drude_hard", "ohmic_exp"] = "drude_hard"
    omega_c: float = Field(1.0, gt=0)
    omega_max: Optional[float] = None

    @model_validator(mode="after")
    def _cutoffs(self):
        if self.omega_max is not None and self.omega_max <= self.omega_c:
            raise ValueError("omega_max must exceed omega_c")
        return self

    @property
    def effective_omega_max(self) -> Optional[float]:
        """Band edge in use; drude_hard defaults to ten times omega_c."""
        if self.variant == "drude_hard" and self.omega_max is None:
            return 10.0 * self.omega_c
        return self.omega_max


class GridConfig(_Strict):
    t_max: float = Field(50.0, gt=0)
    n_points: int = Field(501, ge=2)


class QuadratureConfig(_Strict):
    nodes: int = Field(16, ge=4, le=40)
    table_dt: float = Field(0.02, gt=0)


class OracleConfig(_Strict):
    n_modes: int = Field(300, ge=2)
    omega_max: float = Field(10.0, gt=0)


class RunConfig(_Strict):
    omega0: float = 1.0
    alpha: float = Field(0.1, ge=0)
    theta: float = Field(1.0, ge=0)
    spectral: SpectralConfig = SpectralConfig()
    grid: GridConfig = GridConfig()
    fock_dim: Optional[int] = Field(None, ge=2)
    rk_tol: float = Field(1e-9, gt=0)
    tail_tol: float = Field(1e-8, gt=0)
    quadrature: QuadratureConfig = QuadratureConfig()
    models: List[Literal["fv", "fv_rwa", "rw"]] = ["fv", "rw"]
    moments: bool = False
    oracle: OracleConfig = OracleConfig()
    out: str = "out"

    @field_validator("omega0")
    @classmethod
    def _unit_frequency(cls, v):
        if v != 1.0:
            raise ValueError("omega0 is the frequency unit and must be 1.0")
        return v

    @field_validator("models")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("at least one model is required")
        return v

    def bath(self) -> BathSpec:
        sp = self.spectral
        family = SpectralFamily(sp.variant, sp.omega_c, sp.effective_omega_max)
        return BathSpec(self.alpha, self.theta, family)

    def output_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.grid.t_max, self.grid.n_points)

    def resolved_fock_dim(self) -> int:
        if self.fock_dim is not None:
            return self.fock_dim
        return 40 if self.theta <= 1.0 else 80

    def with_overrides(self, **updates) -> "RunConfig":
        data = self.model_dump()
        for key, value in updates.items():
            if value is None:
                continue
            _assign(data, key, value)
        return parse_config(data)


def _assign(data: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = data
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError(f"unknown config key {dotted!r}")
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key {dotted!r}")
    node[parts[-1]] = value


def _describe(err: ValidationError) -> str:
    msgs = []
    for e in err.errors():
        key = ".".join(str(p) for p in e["loc"]) or "<root>"
        msgs.append(f"{key}: {e['msg']}")
    return "; ".join(msgs)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(f"invalid config: {_describe(err)}") from None


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(data)


def dump_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.model_dump(), indent=2, sort_keys=True) + "\n")
