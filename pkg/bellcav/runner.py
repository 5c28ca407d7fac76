from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from bellcav.config import ModelParams, ScenarioConfig, Settings
from bellcav.errors import BellcavError, CutoffConvergenceError, NumericalError
from bellcav.events import build_event_report
from bellcav.metrics import MetricSeries, compute_metrics
from bellcav.propagators import Trajectory, evolve_closed, evolve_lindblad
from bellcav.report import write_json, write_series_csv
from bellcav.schema import (
    EventReport,
    ScenarioReport,
    SweepAxis,
    SweepReport,
    SweepRow,
)
from bellcav.states import scenario_cutoff

logger = logging.getLogger(__name__)

CUTOFF_RECHECK_INCREMENT = 4


@dataclass(frozen=True)
class ScenarioRun:
    config: ScenarioConfig
    series: MetricSeries
    events: EventReport
    cutoff_delta: float | None = None


@dataclass(frozen=True)
class SweepResult:
    report: SweepReport
    series: list[MetricSeries | None]


def resolve_params(cfg: ScenarioConfig) -> ScenarioConfig:
    """Fill in ``n_max`` from the Fock cutoff policy when it is unset."""
    if cfg.params.n_max is not None:
        return cfg
    n_max = scenario_cutoff(cfg.params)
    logger.debug("Resolved n_max=%d for %s", n_max, cfg.label)
    return cfg.model_copy(
        update={"params": cfg.params.model_copy(update={"n_max": n_max})}
    )


def _evolve(cfg: ScenarioConfig, params: ModelParams, workers: int) -> Trajectory:
    method = cfg.resolved_method
    if method == "rk4":
        return evolve_lindblad(cfg.initial_state, params, cfg.grid, stepper=cfg.stepper)
    return evolve_closed(
        cfg.initial_state,
        params,
        cfg.grid,
        method=method,
        laguerre=cfg.laguerre,
        cutoff_weight=cfg.cutoff_weight,
        workers=workers,
    )


def _series(cfg: ScenarioConfig, params: ModelParams, workers: int) -> MetricSeries:
    return compute_metrics(_evolve(cfg, params, workers), cfg.initial_state, params)


def _check_cutoff(cfg: ScenarioConfig, series: MetricSeries, workers: int) -> float:
    n_max = cfg.params.require_n_max()
    deeper = cfg.params.model_copy(
        update={"n_max": n_max + CUTOFF_RECHECK_INCREMENT}
    )
    delta = series.max_difference(_series(cfg, deeper, workers))
    logger.debug("Cutoff check for %s: n_max=%d delta=%.3e", cfg.label, n_max, delta)
    if delta > cfg.cutoff_tolerance:
        raise CutoffConvergenceError(
            f"Metrics change by {delta:.3e} when n_max goes from {n_max} to "
            f"{deeper.n_max}; raise --nmax",
            delta=delta,
            n_max=n_max,
        )
    return delta


def execute_scenario(cfg: ScenarioConfig, workers: int = 1) -> ScenarioRun:
    """Evolve, evaluate and analyse one scenario without writing anything."""
    resolved = resolve_params(cfg)
    logger.info("Running %s (n_max=%s)", resolved.label, resolved.params.n_max)
    try:
        series = _series(resolved, resolved.params, workers)
        delta = (
            _check_cutoff(resolved, series, workers)
            if resolved.validate_cutoff
            else None
        )
    except NumericalError as exc:
        exc.args = (f"{resolved.label}: {exc}",)
        raise
    return ScenarioRun(
        config=resolved,
        series=series,
        events=build_event_report(series),
        cutoff_delta=delta,
    )


def _events_path(csv_path: Path) -> Path:
    return csv_path.with_name(f"{csv_path.stem}.events.json")


def _scenario_report(run: ScenarioRun, csv_path: Path | None) -> ScenarioReport:
    return ScenarioReport(
        label=run.config.label,
        config=run.config,
        method=run.config.resolved_method,
        n_max=run.config.params.require_n_max(),
        samples=len(run.series),
        csv_path=str(csv_path) if csv_path else None,
        cutoff_delta=run.cutoff_delta,
        events=run.events,
        final=run.series.sample(len(run.series) - 1),
    )


def write_scenario(run: ScenarioRun, csv_path: Path) -> None:
    write_series_csv(csv_path, run.series)
    write_json(_events_path(csv_path), _scenario_report(run, csv_path))


def run_scenario(cfg: ScenarioConfig, settings: Settings | None = None) -> MetricSeries:
    settings = settings or Settings()
    run = execute_scenario(cfg, workers=settings.threads)
    if cfg.output is not None:
        write_scenario(run, cfg.output)
        logger.info("Wrote %s", cfg.output)
    return run.series


def row_label(axis: SweepAxis, value: float, params: ModelParams) -> str:
    if axis == "gamma":
        return f"gamma={value:g}"
    return f"T={value / params.time_unit:g}w"


def sweep_config(base: ScenarioConfig, axis: SweepAxis, value: float) -> ScenarioConfig:
    """A validated copy of ``base`` with one swept parameter replaced."""
    data = base.model_dump()
    if axis == "gamma":
        data["params"]["gamma"] = (value, value)
        data["params"]["temperature"] = 0.0
        data["bath_mode"] = "vacuum_leaky"
    else:
        data["params"]["temperature"] = value
        data["params"]["gamma"] = (0.0, 0.0)
        data["bath_mode"] = "thermal"
    data["output"] = None
    return ScenarioConfig.model_validate(data)


def _shared_cutoff(
    base: ScenarioConfig, axis: SweepAxis, values: Sequence[float]
) -> ScenarioConfig:
    if axis != "temperature" or base.params.n_max is not None:
        return base
    hottest = base.params.model_copy(update={"temperature": max(values)})
    n_max = scenario_cutoff(hottest)
    return base.model_copy(
        update={"params": base.params.model_copy(update={"n_max": n_max})}
    )


def _row_path(output: Path, label: str) -> Path:
    return output.with_name(f"{output.stem}-{label}{output.suffix or '.csv'}")


def sweep(
    base: ScenarioConfig,
    axis: SweepAxis,
    values: Sequence[float],
    workers: int | None = None,
) -> SweepResult:
    """Run one scenario per value; a failing row is recorded and skipped.

    Rows run concurrently and come back in the order of ``values``. When
    ``base.output`` is set, each row writes ``<stem>-<label>.csv`` and the
    table goes to ``<stem>-sweep.json``.
    """
    if not values:
        raise ValueError("sweep needs at least one value")
    workers = workers or Settings().threads
    shared = _shared_cutoff(base, axis, values)

    def run_row(value: float) -> tuple[SweepRow, ScenarioRun | None]:
        row = SweepRow(
            axis=axis,
            state=shared.initial_state,
            value=value,
            label=row_label(axis, value, shared.params),
        )
        try:
            run = execute_scenario(sweep_config(shared, axis, value))
        except (BellcavError, ValueError) as exc:
            logger.warning("Sweep row %s failed: %s", row.label, exc)
            return row.model_copy(update={"error": str(exc)}), None
        return row.model_copy(update={"events": run.events}), run

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        outcomes = list(pool.map(run_row, values))

    rows: list[SweepRow] = []
    series: list[MetricSeries | None] = []
    for row, run in outcomes:
        if run is not None and base.output is not None:
            path = _row_path(base.output, row.label)
            write_scenario(run, path)
            row = row.model_copy(update={"csv_path": str(path)})
        rows.append(row)
        series.append(run.series if run is not None else None)

    report = SweepReport(axis=axis, values=list(values), rows=rows)
    if base.output is not None:
        write_json(base.output.with_name(f"{base.output.stem}-sweep.json"), report)
    return SweepResult(report=report, series=series)
