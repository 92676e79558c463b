"""
`mdlt invert`: Post-Widder or Bromwich inversion of a registry transform.
"""

from typing import Any, Dict

from loguru import logger

from mdlt.core.inversion import inversion_engine
from mdlt.core.registry import pair_registry
from mdlt.core.result_writer import result_writer
from mdlt.models.run import Command, InversionMethod, InvertRequest, ResultTable


def handle(document: Dict[str, Any], seed: int = 0) -> ResultTable:
    request = InvertRequest.model_validate(document)
    F = pair_registry.transform(request.transform)
    logger.info(f"invert: {F.name} with {request.method.value} at {len(request.points)} points")

    if request.method == InversionMethod.BROMWICH:
        result = inversion_engine.bromwich_grid(F, request.points, request.contour)
    else:
        result = inversion_engine.post_widder_grid(F, request.points, request.post_widder)

    rows = []
    for t, value, error in zip(result.points, result.values, result.error_estimate):
        row = result_writer.real_columns("t", t)
        row.update(result_writer.complex_columns("value", value))
        row["error_estimate"] = float(error)
        rows.append(row)

    return ResultTable(
        command=Command.INVERT,
        columns=list(rows[0].keys()),
        rows=rows,
        summary={"transform": F.name, "method": result.method,
                 "accuracy_warning": result.accuracy_warning},
    )
