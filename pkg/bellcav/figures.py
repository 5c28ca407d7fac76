"""Data behind the six reference figures, one CSV per panel."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from bellcav.config import BellKind, ScenarioConfig, TimeGrid
from bellcav.errors import NumericalError
from bellcav.metrics import MetricSeries
from bellcav.report import write_json, write_table_csv
from bellcav.runner import sweep
from bellcav.schema import FigureReport, MetricField, SweepAxis, SweepRow

logger = logging.getLogger(__name__)

GAMMA_VALUES = (0.0, 0.2, 0.4, 0.8)
# multiples of omega
TEMPERATURE_VALUES = (0.0, 0.25, 0.5, 1.0)


@dataclass(frozen=True)
class Panel:
    suffix: str
    state: BellKind
    quantity: MetricField


@dataclass(frozen=True)
class FigureSpec:
    number: int
    title: str
    axis: SweepAxis
    values: tuple[float, ...]
    panels: tuple[Panel, ...]

    @property
    def states(self) -> list[BellKind]:
        return list(dict.fromkeys(panel.state for panel in self.panels))


def _pair(number: int, title: str, axis: SweepAxis, state: BellKind) -> FigureSpec:
    values = GAMMA_VALUES if axis == "gamma" else TEMPERATURE_VALUES
    return FigureSpec(
        number=number,
        title=title,
        axis=axis,
        values=values,
        panels=(Panel("a", state, "concurrence"), Panel("b", state, "fidelity")),
    )


def _entropy(number: int, title: str, axis: SweepAxis) -> FigureSpec:
    values = GAMMA_VALUES if axis == "gamma" else TEMPERATURE_VALUES
    return FigureSpec(
        number=number,
        title=title,
        axis=axis,
        values=values,
        panels=(
            Panel("a", BellKind.PSI_PLUS, "entropy"),
            Panel("b", BellKind.PHI_PLUS, "entropy"),
        ),
    )


FIGURES: dict[int, FigureSpec] = {
    spec.number: spec
    for spec in (
        _pair(1, "phi+ concurrence and fidelity vs gamma", "gamma", BellKind.PHI_PLUS),
        _pair(2, "psi+ concurrence and fidelity vs gamma", "gamma", BellKind.PSI_PLUS),
        _entropy(3, "Entropy exchange vs gamma", "gamma"),
        _pair(4, "phi+ concurrence, fidelity vs T", "temperature", BellKind.PHI_PLUS),
        _pair(5, "psi+ concurrence, fidelity vs T", "temperature", BellKind.PSI_PLUS),
        _entropy(6, "Entropy exchange vs T", "temperature"),
    )
}


def _base_config(spec: FigureSpec, state: BellKind, grid: TimeGrid) -> ScenarioConfig:
    return ScenarioConfig(
        initial_state=state,
        bath_mode="thermal" if spec.axis == "temperature" else "vacuum_leaky",
        grid=grid,
    )


def _absolute(spec: FigureSpec, base: ScenarioConfig) -> list[float]:
    if spec.axis == "gamma":
        return list(spec.values)
    return [value * base.params.time_unit for value in spec.values]


def generate_figure(
    number: int,
    out: Path,
    grid: TimeGrid | None = None,
    workers: int | None = None,
) -> FigureReport:
    """Write ``fig<N><panel>_<quantity>.csv`` files and ``fig<N>_events.json``.

    Raises NumericalError if any curve of the figure fails.
    """
    if number not in FIGURES:
        raise ValueError(f"Unknown figure {number}; expected one of {sorted(FIGURES)}")
    spec = FIGURES[number]
    grid = grid or TimeGrid()

    curves: dict[BellKind, list[MetricSeries]] = {}
    rows: list[SweepRow] = []
    for state in spec.states:
        base = _base_config(spec, state, grid)
        logger.info("Figure %d: sweeping %s for %s", number, spec.axis, state.value)
        result = sweep(base, spec.axis, _absolute(spec, base), workers=workers)
        failed = [row for row in result.report.rows if row.error]
        if failed:
            raise NumericalError(
                f"Figure {number} curve {failed[0].label} ({state.value}) failed: "
                f"{failed[0].error}"
            )
        curves[state] = [series for series in result.series if series is not None]
        rows.extend(result.report.rows)

    files: list[str] = []
    labels = [row.label for row in rows[: len(spec.values)]]
    for panel in spec.panels:
        series = curves[panel.state]
        path = out / f"fig{number}{panel.suffix}_{panel.quantity}.csv"
        write_table_csv(
            path,
            ["omega_t", *labels],
            [series[0].omega_t, *(curve.field(panel.quantity) for curve in series)],
        )
        files.append(str(path))

    report = FigureReport(figure=number, title=spec.title, files=files, rows=rows)
    write_json(out / f"fig{number}_events.json", report)
    return report

