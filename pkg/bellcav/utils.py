from __future__ import annotations

from pathlib import Path


def split_values(value: str | None) -> list[float]:
    """Parse a comma-separated list of numbers such as ``0,0.2,0.4``."""
    if not value:
        return []
    items = [item.strip() for item in value.split(",") if item.strip()]
    try:
        return [float(item) for item in items]
    except ValueError as exc:
        raise ValueError(f"Expected comma-separated numbers, got {value!r}") from exc


def ensure_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
