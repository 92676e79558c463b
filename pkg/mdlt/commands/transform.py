"""
`mdlt transform`: forward transforms of a registry function on a lambda grid.
"""

import math
from typing import Any, Dict

from loguru import logger

from mdlt.core.errors import DivergenceError
from mdlt.core.registry import pair_registry
from mdlt.core.result_writer import result_writer
from mdlt.core.transform_core import transform_engine
from mdlt.models.run import Command, ResultTable, TransformRequest


def handle(document: Dict[str, Any], seed: int = 0) -> ResultTable:
    request = TransformRequest.model_validate(document)
    f = pair_registry.function(request.function)
    logger.info(f"transform: {f.name} at {len(request.points)} points ({request.quadrature.mode.value})")

    rows = []
    diverged = 0
    for p in request.points:
        row = result_writer.complex_columns("lambda", p.values, indexed=True)
        try:
            result = transform_engine.laplace_nd(f, p, request.quadrature)
        except DivergenceError as e:
            logger.warning(f"{f.name} at {p.values.tolist()}: {e}")
            diverged += 1
            row.update(result_writer.complex_columns("value", [complex(math.nan, math.nan)] * f.codim))
            row.update({"mode": request.quadrature.mode.value, "tail_estimate": math.nan, "converged": False})
            rows.append(row)
            continue
        if not result.converged:
            diverged += 1
        row.update(result_writer.complex_columns("value", result.value))
        row.update({
            "mode": result.mode_used.value,
            "tail_estimate": max(result.tail_estimate) if result.tail_estimate else 0.0,
            "converged": bool(result.converged),
        })
        rows.append(row)

    return ResultTable(
        command=Command.TRANSFORM,
        columns=list(rows[0].keys()),
        rows=rows,
        summary={"function": f.name, "points": len(rows), "diverged": diverged},
        exit_code=2 if diverged else 0,
    )
