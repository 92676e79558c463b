"""
`mdlt region`: convergence-region verdicts and abscissa estimates.
"""

from typing import Any, Dict

from loguru import logger

from mdlt.core.registry import pair_registry
from mdlt.core.result_writer import result_writer
from mdlt.core.transform_core import transform_engine
from mdlt.models.run import Command, RegionRequest, ResultTable


def handle(document: Dict[str, Any], seed: int = 0) -> ResultTable:
    request = RegionRequest.model_validate(document)
    f = pair_registry.function(request.function)
    logger.info(f"region: {f.name} at {len(request.probes)} probes")

    envelope_ratio = f.spot_check_envelope(seed=seed)
    report = transform_engine.convergence_report(f, request.probes, request.quadrature, request.probe_grid)

    rows = []
    for item in report.memberships:
        row = result_writer.complex_columns("lambda", item.point.values, indexed=True)
        row.update({
            "verdict": item.verdict.value,
            "absolutely_convergent": item.absolutely_convergent,
            "bounded": item.bounded,
            "iterated_converged": item.iterated_converged,
        })
        rows.append(row)

    return ResultTable(
        command=Command.REGION,
        columns=list(rows[0].keys()),
        rows=rows,
        summary={"function": f.name, "abs_abscissa": report.abs_abscissa,
                 "envelope_ratio": envelope_ratio},
    )
