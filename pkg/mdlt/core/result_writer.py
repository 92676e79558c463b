"""
Result writer for command output tables.
"""

import math
from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from mdlt.models.run import OutputFormat, ResultTable


def _round12(value: Any) -> Any:
    """Round floats to 12 significant digits, recursively; non-finite floats become None."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return float(f"{value:.12g}") if math.isfinite(value) else None
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    return value


class ResultWriter:
    """
    Writes command result tables.

    Features:
    - CSV through pandas with 12 significant digits
    - JSON tables validated by schemas/output.schema.json
    - Complex vectors split into _re / _im columns
    """

    @staticmethod
    def complex_columns(prefix: str, values: Sequence[complex], indexed: bool = False) -> Dict[str, float]:
        """{prefix}_{i}_re / {prefix}_{i}_im per component (plain _re/_im for scalars unless indexed)."""
        values = np.atleast_1d(np.asarray(values, dtype=complex))
        if values.size == 1 and not indexed:
            return {f"{prefix}_re": float(values[0].real), f"{prefix}_im": float(values[0].imag)}
        out = {}
        for i, v in enumerate(values, start=1):
            out[f"{prefix}_{i}_re"] = float(v.real)
            out[f"{prefix}_{i}_im"] = float(v.imag)
        return out

    @staticmethod
    def real_columns(prefix: str, values: Sequence[float]) -> Dict[str, float]:
        """{prefix}_1, ..., {prefix}_n."""
        return {f"{prefix}_{i}": float(v) for i, v in enumerate(np.atleast_1d(values), start=1)}

    def write(self, table: ResultTable, output: Path, fmt: OutputFormat = OutputFormat.CSV) -> Path:
        output = Path(output)
        output.parent.mkdir(parents=True, exist_ok=True)
        if fmt == OutputFormat.CSV:
            frame = pd.DataFrame(table.rows, columns=table.columns)
            frame.to_csv(output, index=False, float_format="%.12g", lineterminator="\n")
        else:
            rounded = table.model_copy(update={"rows": _round12(table.rows),
                                               "summary": _round12(table.summary)})
            output.write_text(rounded.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"Wrote {len(table.rows)} rows to {output}")
        return output


# Global result writer instance
result_writer = ResultWriter()
