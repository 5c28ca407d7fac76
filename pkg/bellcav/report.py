from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from bellcav.metrics import MetricSeries
from bellcav.utils import ensure_dir

SERIES_HEADER = ("omega_t", "concurrence", "fidelity", "entropy")
CSV_FORMAT = "%.9g"


def write_json(path: Path, payload: BaseModel | dict | list) -> None:
    data: Any
    if isinstance(payload, BaseModel):
        data = payload.model_dump(mode="json")
    else:
        data = payload
    ensure_dir(path.parent)
    path.write_text(json.dumps(data, indent=2, ensure_ascii=True) + "\n")


def write_table_csv(
    path: Path, header: Sequence[str], columns: Sequence[np.ndarray]
) -> None:
    if len(header) != len(columns):
        raise ValueError(f"{len(header)} header fields for {len(columns)} columns")
    lengths = {len(column) for column in columns}
    if len(lengths) > 1:
        raise ValueError(f"Columns have different lengths: {sorted(lengths)}")
    ensure_dir(path.parent)
    np.savetxt(
        path,
        np.column_stack(columns),
        fmt=CSV_FORMAT,
        delimiter=",",
        header=",".join(header),
        comments="",
    )


def write_series_csv(path: Path, series: MetricSeries) -> None:
    write_table_csv(
        path,
        SERIES_HEADER,
        [series.omega_t, series.concurrence, series.fidelity, series.entropy],
    )

