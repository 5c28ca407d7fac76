from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from bellcav.config import BellKind, ScenarioConfig

MetricField = Literal["concurrence", "fidelity", "entropy"]
ExtremumKind = Literal["peaks", "valleys"]
SweepAxis = Literal["gamma", "temperature"]


class MetricSample(BaseModel):
    omega_t: float
    concurrence: float = Field(ge=0.0, le=1.0)
    fidelity: float = Field(ge=0.0, le=1.0)
    entropy: float = Field(ge=0.0, le=2.0)


class EventReport(BaseModel):
    first_esd_time: float | None = None
    revival_flag: bool = False
    revival_peak: float | None = None
    peak_times: list[float] = Field(default_factory=list)
    peak_values: list[float] = Field(default_factory=list)
    valley_times: list[float] = Field(default_factory=list)
    valley_values: list[float] = Field(default_factory=list)


class ScenarioReport(BaseModel):
    label: str
    config: ScenarioConfig
    method: str
    n_max: int
    samples: int
    csv_path: str | None = None
    cutoff_delta: float | None = None
    events: EventReport
    final: MetricSample


class SweepRow(BaseModel):
    axis: SweepAxis
    state: BellKind
    value: float
    label: str
    csv_path: str | None = None
    events: EventReport | None = None
    error: str | None = None


class SweepReport(BaseModel):
    axis: SweepAxis
    values: list[float]
    rows: list[SweepRow]


class FigureReport(BaseModel):
    figure: int
    title: str
    files: list[str]
    rows: list[SweepRow]


class CheckResult(BaseModel):
    name: str
    passed: bool
    max_error: float
    tolerance: float
    detail: str | None = None


class VerifyReport(BaseModel):
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
