from __future__ import annotations

import logging
import os
from enum import Enum
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import (
    AliasChoices,
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

Pair = tuple[float, float]
BathMode = Literal["vacuum_leaky", "thermal"]
Method = Literal["laguerre", "exact", "rk4"]
Stepper = Literal["rk4", "reference"]

STATE_ALIASES = {
    "phi+": "phi+",
    "phi_plus": "phi+",
    "psi+": "psi+",
    "psi_plus": "psi+",
    "phi-": "phi-",
    "phi_minus": "phi-",
    "psi-": "psi-",
    "psi_minus": "psi-",
}


class BellKind(str, Enum):
    PHI_PLUS = "phi+"
    PSI_PLUS = "psi+"
    PHI_MINUS = "phi-"
    PSI_MINUS = "psi-"


def resolve_state(value: str | BellKind) -> BellKind:
    if isinstance(value, BellKind):
        return value
    normalized = value.strip().lower()
    if normalized not in STATE_ALIASES:
        raise ValueError(f"Unknown Bell state {value!r}")
    return BellKind(STATE_ALIASES[normalized])


def _default_threads() -> int:
    return min(os.cpu_count() or 1, 8)


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="", extra="ignore")

    threads: int = Field(
        default_factory=_default_threads,
        ge=1,
        validation_alias=AliasChoices("BELLCAV_THREADS"),
    )
    log_level: str = Field(
        default="WARNING",
        validation_alias=AliasChoices("BELLCAV_LOG_LEVEL"),
    )

    @field_validator("log_level")
    @classmethod
    def check_log_level(cls, value: str) -> str:
        level = value.strip().upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level {value!r}")
        return level


class ModelParams(BaseModel):
    """Physical parameters of both atom/cavity subsystems (hbar = k_B = 1)."""

    model_config = ConfigDict(frozen=True)

    omega: Pair = (0.4, 0.4)
    epsilon: Pair = (-0.5, -0.5)
    g: Pair = (0.2, 0.2)
    gamma: Pair = (0.0, 0.0)
    temperature: float = Field(default=0.0, ge=0.0)
    n_max: int | None = Field(default=None, ge=2)
    flip_qubit_basis: bool = False

    @field_validator("omega", "epsilon", "g", "gamma", mode="before")
    @classmethod
    def expand_scalar(cls, value: object) -> object:
        if isinstance(value, (int, float)):
            return (float(value), float(value))
        return value

    @model_validator(mode="after")
    def check_ranges(self) -> ModelParams:
        if min(self.omega) <= 0:
            raise ValueError("omega must be positive")
        if min(self.g) < 0:
            raise ValueError("g must be non-negative")
        if min(self.gamma) < 0:
            raise ValueError("gamma must be non-negative")
        for omega, epsilon in zip(self.omega, self.epsilon):
            if (1 + epsilon) * omega <= 0:
                raise ValueError("(1 + epsilon) * omega must be positive")
        return self

    def mode_frequency(self, j: int) -> float:
        return (1 + self.epsilon[j - 1]) * self.omega[j - 1]

    @property
    def time_unit(self) -> float:
        """omega_1: converts physical time to the omega*t axis."""
        return self.omega[0]

    @property
    def is_leaky(self) -> bool:
        return max(self.gamma) > 0

    def require_n_max(self) -> int:
        if self.n_max is None:
            raise ValueError("n_max is unresolved; apply the Fock cutoff policy first")
        return self.n_max


class LaguerreConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.0, gt=-1.0)
    k_max: int = Field(default=64, ge=1)
    step: float = Field(default=0.1, gt=0.0)
    tolerance: float = Field(default=1e-12, gt=0.0)


class TimeGrid(BaseModel):
    """Uniform grid on the omega*t axis."""

    model_config = ConfigDict(frozen=True)

    t_max: float = Field(default=40.0, ge=0.0)
    dt: float = Field(default=0.032, gt=0.0)

    @property
    def count(self) -> int:
        return int(np.ceil(self.t_max / self.dt - 1e-9)) + 1

    def omega_times(self) -> np.ndarray:
        return np.arange(self.count) * self.dt

    def physical_times(self, params: ModelParams) -> np.ndarray:
        return self.omega_times() / params.time_unit


class ScenarioConfig(BaseModel):
    initial_state: BellKind = BellKind.PHI_PLUS
    bath_mode: BathMode = "vacuum_leaky"
    params: ModelParams = Field(default_factory=ModelParams)
    grid: TimeGrid = Field(default_factory=TimeGrid)
    method: Method | None = None
    stepper: Stepper = "reference"
    laguerre: LaguerreConfig = Field(default_factory=LaguerreConfig)
    cutoff_weight: float = Field(default=1e-8, gt=0.0, lt=1.0)
    validate_cutoff: bool = True
    cutoff_tolerance: float = Field(default=1e-6, gt=0.0)
    output: Path | None = None

    @field_validator("initial_state", mode="before")
    @classmethod
    def normalize_state(cls, value: object) -> object:
        if isinstance(value, str):
            return resolve_state(value)
        return value

    @model_validator(mode="after")
    def check_bath(self) -> ScenarioConfig:
        if self.bath_mode == "thermal" and self.params.is_leaky:
            raise ValueError("thermal bath requires gamma = 0")
        if self.bath_mode == "vacuum_leaky" and self.params.temperature != 0:
            raise ValueError("vacuum_leaky bath requires temperature = 0")
        if self.method in ("laguerre", "exact") and self.params.is_leaky:
            raise ValueError(f"method {self.method} is closed evolution; gamma must be 0")
        if self.method == "rk4" and self.bath_mode == "thermal":
            raise ValueError("method rk4 integrates vacuum_leaky scenarios only")
        return self

    @property
    def resolved_method(self) -> Method:
        if self.method is not None:
            return self.method
        return "rk4" if self.params.is_leaky else "laguerre"

    @property
    def label(self) -> str:
        gamma = self.params.gamma[0]
        temperature = self.params.temperature / self.params.time_unit
        return (
            f"{self.initial_state.value} {self.bath_mode} "
            f"gamma={gamma:g} T={temperature:g}w"
        )
