import json
from pathlib import Path

import numpy as np
import pytest

from bellcav.config import BellKind, TimeGrid
from bellcav.figures import FIGURES, generate_figure

GRID = TimeGrid(t_max=0.5)


def _panel(path: Path) -> tuple[list[str], np.ndarray]:
    header = path.read_text().splitlines()[0].split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_figure_table_covers_all_six():
    assert sorted(FIGURES) == [1, 2, 3, 4, 5, 6]
    assert FIGURES[1].states == [BellKind.PHI_PLUS]
    assert FIGURES[5].axis == "temperature"
    assert FIGURES[3].states == [BellKind.PSI_PLUS, BellKind.PHI_PLUS]


def test_unknown_figure_is_rejected(tmp_path):
    with pytest.raises(ValueError, match="Unknown figure"):
        generate_figure(7, tmp_path)


def test_figure_one_panels(tmp_path):
    report = generate_figure(1, tmp_path, grid=GRID, workers=2)
    assert [Path(p).name for p in report.files] == [
        "fig1a_concurrence.csv",
        "fig1b_fidelity.csv",
    ]
    header, values = _panel(tmp_path / "fig1a_concurrence.csv")
    assert header == ["omega_t", "gamma=0", "gamma=0.2", "gamma=0.4", "gamma=0.8"]
    assert values.shape == (GRID.count, 5)
    assert list(values[0]) == [0.0, 1.0, 1.0, 1.0, 1.0]
    assert np.all((values[:, 1:] >= 0) & (values[:, 1:] <= 1))

    events = json.loads((tmp_path / "fig1_events.json").read_text())
    assert events["figure"] == 1
    assert len(events["rows"]) == 4


def test_figure_output_is_reproducible(tmp_path):
    names = ("fig3a_entropy.csv", "fig3b_entropy.csv", "fig3_events.json")
    generate_figure(3, tmp_path, grid=GRID)
    first = {name: (tmp_path / name).read_bytes() for name in names}
    generate_figure(3, tmp_path, grid=GRID)
    for name in names:
        assert (tmp_path / name).read_bytes() == first[name]


@pytest.mark.slow
def test_temperature_figure_panels(tmp_path):
    generate_figure(4, tmp_path, grid=TimeGrid(t_max=2.0))
    header, values = _panel(tmp_path / "fig4b_fidelity.csv")
    assert header == ["omega_t", "T=0w", "T=0.25w", "T=0.5w", "T=1w"]
    assert list(values[0]) == [0.0, 1.0, 1.0, 1.0, 1.0]
