"""Persistence

Deterministic CSV/JSON writers with atomic replace, and the matching readers.
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ...domain.value_objects.grid import GridFunction
from ...domain.value_objects.measure import Measure
from ...domain.value_objects.mollifier_kernel import MollifierKernel

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def atomic_write_text(path, text: str) -> Path:
    """Write text to a temporary file next to path, then os.replace it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info("wrote %s", path)
    return path


def _json_safe(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, (np.floating, np.integer)):
        return _json_safe(value.item())
    if isinstance(value, Mapping):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return _json_safe(value.tolist())
    return value


def dumps(data: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, non-finite floats as null."""
    return json.dumps(_json_safe(data), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, data: Any) -> Path:
    return atomic_write_text(path, dumps(data))


def header_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_suffix(".json")


def write_grid_function(path, u: GridFunction) -> Path:
    """Write u as a CSV matrix (row i = node index along x) plus a JSON header."""
    buffer = io.StringIO()
    np.savetxt(buffer, u.values, fmt=FLOAT_FORMAT, delimiter=",")
    atomic_write_text(path, buffer.getvalue())
    write_json(header_path(path), u.grid.to_dict())
    return Path(path)


def read_grid_function(path) -> Tuple[np.ndarray, Optional[dict]]:
    """Read a CSV matrix and its optional JSON header."""
    path = Path(path)
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    if values.shape[0] != values.shape[1]:
        raise ValueError(f"{path} holds a {values.shape} matrix, expected square")
    header_file = header_path(path)
    header = json.loads(header_file.read_text(encoding="utf-8")) if header_file.is_file() else None
    return values, header


def write_measure(path, m: Measure) -> Path:
    """Extracted measure as JSON: grid header, atoms and the nodal density."""
    return write_json(path, m.to_dict())


def write_kernel(path, k: MollifierKernel) -> Path:
    """Kernel weights as CSV plus its parameters as the JSON header."""
    buffer = io.StringIO()
    np.savetxt(buffer, k.weights, fmt=FLOAT_FORMAT, delimiter=",")
    atomic_write_text(path, buffer.getvalue())
    write_json(header_path(path), k.to_dict())
    return Path(path)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def write_rows(path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    """CSV with a header row; missing values are written as empty cells."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return atomic_write_text(path, buffer.getvalue())


TRACE_COLUMNS: List[str] = ["scheme", "n", "level", "l1_increment", "atom_mass", "newton_iters"]
