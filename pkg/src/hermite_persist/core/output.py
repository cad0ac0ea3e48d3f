"""Result file writers.

All writers are locale-independent and byte-reproducible: floats are
written with ``repr`` precision and JSON keys are sorted.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from numpy.typing import NDArray

logger = structlog.get_logger()


def format_value(value: Any) -> str:
    """Format a cell value; floats keep full round-trip precision."""
    if isinstance(value, bool | np.bool_):
        return "1" if value else "0"
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and infinities into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, float | np.floating):
        f = float(value)
        if np.isnan(f):
            return None
        if np.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(value, Path):
        return str(value)
    return value


class OutputWriter:
    """
    Writes the files of one run and tracks them.

    ``discard()`` removes everything written so far; the CLI calls it when a
    run aborts so no partial outputs survive.
    """

    def __init__(self, root: Path) -> None:
        self.root = root
        self.written: list[Path] = []

    def _path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / name
        self.written.append(path)
        return path

    def write_csv(
        self,
        name: str,
        header: Sequence[str] | None,
        rows: Iterable[Sequence[Any]],
    ) -> Path:
        """Write a CSV file (header optional) with ``\\n`` line endings."""
        path = self._path(name)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if header is not None:
                writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
        return path

    def write_matrix_csv(self, name: str, matrix: NDArray[np.float64]) -> Path:
        """Headerless CSV, one matrix row per line."""
        return self.write_csv(name, None, (row.tolist() for row in np.atleast_2d(matrix)))

    def write_json(self, name: str, payload: dict[str, Any]) -> Path:
        path = self._path(name)
        path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")
        return path

    def write_bytes(self, name: str, data: bytes) -> Path:
        path = self._path(name)
        path.write_bytes(data)
        return path

    def discard(self) -> None:
        """Delete every file written through this writer."""
        for path in self.written:
            path.unlink(missing_ok=True)
        if self.written:
            logger.warning("Discarded partial outputs", files=[p.name for p in self.written])
        self.written.clear()
