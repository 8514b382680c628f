"""CSV/JSON artifact writing and number formatting."""

import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np

from supnoninf.core import get_logger, settings

logger = get_logger(__name__)

PathLike = Union[str, Path]


def format_number(value: Any, digits: Optional[int] = None) -> Any:
    """
    Round floats to ``digits`` significant digits; other values pass through.

    Non-finite floats become the strings "inf", "-inf" and "nan".
    """
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        sig = digits or settings.output_sig_digits
        return float(f"{value:.{sig}g}")
    return value


def round_tree(data: Any, digits: Optional[int] = None) -> Any:
    """Apply ``format_number`` through nested dicts, lists and arrays."""
    if isinstance(data, dict):
        return {key: round_tree(item, digits) for key, item in data.items()}
    if isinstance(data, (list, tuple)):
        return [round_tree(item, digits) for item in data]
    if isinstance(data, np.ndarray):
        return round_tree(data.tolist(), digits)
    return format_number(data, digits)


def manifest_sidecar(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def write_json(data: Any, path: Optional[PathLike] = None, stream: Optional[TextIO] = None) -> None:
    """Write a JSON document to ``path`` or to ``stream`` (stdout by default)."""
    text = json.dumps(data, indent=2, allow_nan=False)
    if path is None:
        (stream or sys.stdout).write(text + "\n")
        return
    Path(path).write_text(text + "\n", encoding="utf-8")
    logger.info("Wrote JSON artifact", path=str(path))


def write_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    path: Optional[PathLike] = None,
    digits: Optional[int] = None,
    manifest: Optional[dict] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """
    Write a header row and data rows as UTF-8 CSV.

    When writing to a file, ``manifest`` goes to ``<file>.manifest.json``.
    """
    formatted = [[format_number(value, digits) for value in row] for row in rows]
    if path is None:
        writer = csv.writer(stream or sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(formatted)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(formatted)
    logger.info("Wrote CSV artifact", path=str(path), rows=len(formatted))
    if manifest is not None:
        write_json(manifest, manifest_sidecar(path))


def read_csv_rows(path: PathLike) -> List[List[str]]:
    with open(path, encoding="utf-8", newline="") as handle:
        return [row for row in csv.reader(handle) if row]
