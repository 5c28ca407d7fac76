from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, cast

import typer
from pydantic import ValidationError

from bellcav.config import ModelParams, ScenarioConfig, Settings, TimeGrid
from bellcav.errors import ConfigError, InvalidStateError, NumericalError
from bellcav.figures import generate_figure
from bellcav.report import write_json
from bellcav.runner import run_scenario, sweep
from bellcav.schema import SweepAxis
from bellcav.utils import split_values
from bellcav.verify import DEFAULT_SEED, run_checks

app = typer.Typer(add_completion=False)

DEFAULT_RUN_OUTPUT = Path("runs") / "scenario.csv"
DEFAULT_SWEEP_OUTPUT = Path("runs") / "sweep.csv"


class Axis(str, Enum):
    GAMMA = "gamma"
    TEMPERATURE = "temperature"


@app.callback()
def _callback(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log debug output"),
) -> None:
    """Bell-state entanglement dynamics of two atoms in separate cavities."""
    with _exit_codes():
        settings = Settings()
    level = logging.DEBUG if verbose else settings.log_level
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@contextmanager
def _exit_codes() -> Iterator[None]:
    try:
        yield
    except (NumericalError, InvalidStateError) as exc:
        typer.echo(f"Numerical failure: {exc}", err=True)
        raise typer.Exit(code=3) from exc
    except (ConfigError, ValidationError, ValueError) as exc:
        typer.echo(f"Configuration error: {exc}", err=True)
        raise typer.Exit(code=2) from exc


def _load_config(path: Path | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    return ScenarioConfig.model_validate_json(text).model_dump()


def _build_config(
    config: Path | None,
    state: str | None,
    gamma: float | None = None,
    temperature: float | None = None,
    nmax: int | None = None,
    tmax: float | None = None,
    dt: float | None = None,
    alpha: float | None = None,
    method: str | None = None,
    stepper: str | None = None,
    flip_qubit_basis: bool | None = None,
    out: Path | None = None,
) -> ScenarioConfig:
    """Config file values with every given flag applied on top."""
    if gamma is not None and temperature is not None:
        raise ConfigError("--gamma and --temperature select different baths; give one")
    data = _load_config(config)
    params = data.setdefault("params", {})
    grid = data.setdefault("grid", {})
    laguerre = data.setdefault("laguerre", {})

    if state is not None:
        data["initial_state"] = state
    if flip_qubit_basis is not None:
        params["flip_qubit_basis"] = flip_qubit_basis
    if nmax is not None:
        params["n_max"] = nmax
    if gamma is not None:
        params.update(gamma=gamma, temperature=0.0)
        data["bath_mode"] = "vacuum_leaky"
    if temperature is not None:
        omega = ModelParams.model_validate(params).time_unit
        params.update(temperature=temperature * omega, gamma=0.0)
        data["bath_mode"] = "thermal"
    if tmax is not None:
        grid["t_max"] = tmax
    if dt is not None:
        grid["dt"] = dt
    if alpha is not None:
        laguerre["alpha"] = alpha
    if method is not None:
        data["method"] = method
    if stepper is not None:
        data["stepper"] = stepper
    if out is not None:
        data["output"] = out
    return ScenarioConfig.model_validate(data)


@app.command()
def run(
    state: str | None = typer.Option(None, help="Initial Bell state: phi+|psi+"),
    gamma: float | None = typer.Option(None, help="Cavity photon loss rate"),
    temperature: float | None = typer.Option(
        None, help="Thermal cavity temperature in units of omega"
    ),
    nmax: int | None = typer.Option(None, help="Fock cutoff per cavity"),
    tmax: float | None = typer.Option(None, help="Final omega*t"),
    dt: float | None = typer.Option(None, help="Grid spacing in omega*t"),
    alpha: float | None = typer.Option(None, help="Laguerre family parameter"),
    method: str | None = typer.Option(
        None, help="Evolution method: laguerre|exact|rk4"
    ),
    stepper: str | None = typer.Option(
        None, help="Master equation stepper: rk4|reference"
    ),
    out: Path | None = typer.Option(None, help="Output CSV path"),
    config: Path | None = typer.Option(None, help="Scenario JSON file"),
    flip_qubit_basis: bool | None = typer.Option(
        None, "--flip-qubit-basis/--no-flip-qubit-basis", help="Negate sigma_z"
    ),
) -> None:
    with _exit_codes():
        cfg = _build_config(
            config,
            state,
            gamma=gamma,
            temperature=temperature,
            nmax=nmax,
            tmax=tmax,
            dt=dt,
            alpha=alpha,
            method=method,
            stepper=stepper,
            flip_qubit_basis=flip_qubit_basis,
            out=out,
        )
        if cfg.output is None:
            cfg = cfg.model_copy(update={"output": DEFAULT_RUN_OUTPUT})
        series = run_scenario(cfg, Settings())
    typer.echo(f"Series written to {cfg.output} ({len(series)} samples)")


@app.command(name="sweep")
def sweep_command(
    axis: Axis = typer.Option(..., help="Swept parameter"),
    values: str = typer.Option(
        ..., help="Comma-separated values; temperatures in units of omega"
    ),
    state: str | None = typer.Option(None, help="Initial Bell state: phi+|psi+"),
    nmax: int | None = typer.Option(None, help="Fock cutoff per cavity"),
    tmax: float | None = typer.Option(None, help="Final omega*t"),
    dt: float | None = typer.Option(None, help="Grid spacing in omega*t"),
    alpha: float | None = typer.Option(None, help="Laguerre family parameter"),
    stepper: str | None = typer.Option(
        None, help="Master equation stepper: rk4|reference"
    ),
    out: Path = typer.Option(DEFAULT_SWEEP_OUTPUT, help="Output CSV stem"),
    config: Path | None = typer.Option(None, help="Scenario JSON file"),
    flip_qubit_basis: bool | None = typer.Option(
        None, "--flip-qubit-basis/--no-flip-qubit-basis", help="Negate sigma_z"
    ),
) -> None:
    with _exit_codes():
        swept = split_values(values)
        if not swept:
            raise ConfigError("--values needs at least one number")
        base = _build_config(
            config,
            state,
            nmax=nmax,
            tmax=tmax,
            dt=dt,
            alpha=alpha,
            stepper=stepper,
            flip_qubit_basis=flip_qubit_basis,
            out=out,
        )
        if axis is Axis.TEMPERATURE:
            swept = [value * base.params.time_unit for value in swept]
        result = sweep(
            base, cast(SweepAxis, axis.value), swept, workers=Settings().threads
        )
    for row in result.report.rows:
        status = f"error: {row.error}" if row.error else f"written to {row.csv_path}"
        typer.echo(f"{row.label}: {status}")
    if any(row.error for row in result.report.rows):
        raise typer.Exit(code=3)


@app.command()
def figure(
    number: int = typer.Argument(..., min=1, max=6, help="Figure number (1-6)"),
    out: Path = typer.Option(Path("figures"), help="Output directory"),
    tmax: float | None = typer.Option(None, help="Final omega*t"),
    dt: float | None = typer.Option(None, help="Grid spacing in omega*t"),
) -> None:
    with _exit_codes():
        grid = TimeGrid.model_validate(
            {
                key: value
                for key, value in (("t_max", tmax), ("dt", dt))
                if value is not None
            }
        )
        report = generate_figure(number, out, grid=grid, workers=Settings().threads)
    for path in report.files:
        typer.echo(f"Panel written to {path}")
    typer.echo(f"Events written to {out / f'fig{number}_events.json'}")


@app.command()
def verify(
    seed: int = typer.Option(DEFAULT_SEED, help="Seed for the random oracles"),
    out: Path | None = typer.Option(None, help="Write the report as JSON"),
) -> None:
    with _exit_codes():
        report = run_checks(seed)
    for check in report.checks:
        status = "ok" if check.passed else "FAILED"
        typer.echo(
            f"{check.name}: {status} "
            f"(max error {check.max_error:.2e}, tolerance {check.tolerance:.0e})"
        )
    if out is not None:
        write_json(out, report)
    if not report.passed:
        raise typer.Exit(code=3)


def main(argv: list[str] | None = None) -> int:
    """Console entry point returning the process exit status."""
    try:
        app(args=argv, prog_name="bellcav")
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0
