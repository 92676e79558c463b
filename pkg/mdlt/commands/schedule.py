"""
`mdlt schedule`: initial traces required by one or more multi-indices.
"""

from typing import Any, Dict

from mdlt.core.solvers import resolvent_solver
from mdlt.models.operational import MultiIndex
from mdlt.models.run import Command, ResultTable, ScheduleRequest


def handle(document: Dict[str, Any], seed: int = 0) -> ResultTable:
    request = ScheduleRequest.model_validate(document)
    alphas = [MultiIndex(v=request.alpha)] + [MultiIndex(v=a) for a in request.extra_alphas]
    schedule = resolvent_solver.multi_index_schedule(alphas, request.axis_order)

    rows = [
        {"step": i, "trace": entry.text(), "zeroed_axis": entry.zeroed_axis,
         "derivative": ",".join(str(d) for d in entry.derivative)}
        for i, entry in enumerate(schedule.entries, start=1)
    ]
    return ResultTable(
        command=Command.SCHEDULE,
        columns=["step", "trace", "zeroed_axis", "derivative"],
        rows=rows,
        summary={"alpha": request.alpha, "axis_order": request.axis_order, "count": len(rows)},
    )
