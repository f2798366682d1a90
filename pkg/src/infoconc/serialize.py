"""Deterministic CSV and JSON output.

Floats are rendered with 17 significant digits so a value survives a
round-trip exactly; JSON keys are sorted so identical configurations
produce byte-identical reports.  Anything time- or host-dependent belongs
in the report's "meta" block, which comparisons are expected to drop.
"""
from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

__all__ = ["fmt17", "write_csv", "canonical_json", "dump_json"]


def fmt17(x) -> str:
    """Render a float with enough digits to round-trip (shortest %.17g)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _cell(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return fmt17(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows with a fixed header, floats at full precision, LF endings."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(x) for x in row) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Serialize with sorted keys and stable separators (ends with newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def dump_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(obj))
