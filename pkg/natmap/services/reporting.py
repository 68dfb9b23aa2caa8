"""Report envelopes, finiteness checks and JSON/CSV emission."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import scipy

import natmap
from natmap.schemas.report import SCHEMA_VERSION, Report
from natmap.schemas.run_config import RunConfig
from natmap.services.errors import NatmapError

logger = logging.getLogger(__name__)


def versions() -> Dict[str, str]:
    return {"natmap": natmap.__version__, "numpy": np.__version__, "scipy": scipy.__version__}


def to_native(value: Any) -> Any:
    """Convert numpy scalars and arrays into JSON-native values."""
    if isinstance(value, dict):
        return {str(k): to_native(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_native(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_native(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def check_finite(value: Any, path: str = "result") -> None:
    """Raises NatmapError on the first NaN or infinity found in a nested structure."""
    if isinstance(value, dict):
        for key, item in value.items():
            check_finite(item, f"{path}.{key}")
    elif isinstance(value, list):
        for index, item in enumerate(value):
            check_finite(item, f"{path}[{index}]")
    elif isinstance(value, float) and not math.isfinite(value):
        raise NatmapError(f"Non-finite number {value} at {path}")


def build_report(config: RunConfig, result: Dict[str, Any]) -> Report:
    result = to_native(result)
    check_finite(result)
    return Report(
        command=config.command,
        config=config,
        seed=config.seed,
        versions=versions(),
        result=result,
    )


def render_json(report: Report) -> str:
    payload = report.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    buffer.write(f"# {SCHEMA_VERSION}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def emit(text: str, out: Optional[str]) -> None:
    """Single writer: the output file if given, stdout otherwise."""
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"Wrote {len(text)} bytes to {out}")
    else:
        print(text, end="")


def flatten_rows(records: List[Dict[str, Any]], columns: Sequence[str]) -> List[List[Any]]:
    return [[record[c] for c in columns] for record in records]
