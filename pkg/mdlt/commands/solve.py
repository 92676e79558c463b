"""
`mdlt solve`: second-order, Volterra and fractional problems.
"""

from typing import Any, Dict

from loguru import logger

from mdlt.core.result_writer import result_writer
from mdlt.core.solvers import resolvent_solver
from mdlt.models.run import Command, ProblemKind, ResultTable, SolveRequest


def handle(document: Dict[str, Any], seed: int = 0) -> ResultTable:
    request = SolveRequest.model_validate(document)
    problem = request.build()
    solve = {
        ProblemKind.SECOND_ORDER: resolvent_solver.solve_second_order,
        ProblemKind.VOLTERRA: resolvent_solver.solve_volterra,
        ProblemKind.FRACTIONAL: resolvent_solver.solve_fractional_2d,
    }[request.kind]
    result = solve(problem)

    rows = []
    for t, value, residual in zip(result.points, result.values, result.residuals):
        row = result_writer.real_columns("t", t)
        row.update(result_writer.complex_columns("u", value))
        row["residual"] = float(residual)
        rows.append(row)

    if result.best_effort:
        logger.warning("solve: resolvent failed the decay check; results are best-effort")
    return ResultTable(
        command=Command.SOLVE,
        columns=list(rows[0].keys()),
        rows=rows,
        summary={
            "kind": request.kind.value,
            "residual_max": result.residual_max,
            "best_effort": result.best_effort,
            "decay_check": result.decay_check.model_dump() if result.decay_check else None,
        },
        exit_code=2 if result.best_effort else 0,
    )
