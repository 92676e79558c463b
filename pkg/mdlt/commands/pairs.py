"""
`mdlt pairs`: numeric forward transform against the closed form of a
Mittag-Leffler or Wright pair.
"""

from typing import Any, Dict

import numpy as np
from loguru import logger

from mdlt.core.errors import ConfigurationError
from mdlt.core.registry import pair_registry
from mdlt.core.result_writer import result_writer
from mdlt.core.transform_core import transform_engine
from mdlt.models.run import Command, PairKind, PairsRequest, ResultTable
from mdlt.models.transform import FunctionRef


_REGISTRY_NAMES = {PairKind.ML: "ml_pair", PairKind.WRIGHT: "wright_pair"}


def handle(document: Dict[str, Any], seed: int = 0) -> ResultTable:
    request = PairsRequest.model_validate(document)
    pair = pair_registry.build(FunctionRef(name=_REGISTRY_NAMES[request.pair], dims=request.dims,
                                           params=request.params))
    abscissa = np.asarray(pair.abscissa, dtype=float)
    for p in request.points:
        if p.dims != request.dims:
            raise ConfigurationError(f"point {p.values.tolist()} needs {request.dims} components")
        if np.any(p.values.real <= abscissa):
            raise ConfigurationError(
                f"Re lambda {p.values.real.tolist()} must exceed the abscissa {abscissa.tolist()}"
            )
    logger.info(f"pairs: {request.pair.value} {request.params} at {len(request.points)} points")

    rows = []
    failed = 0
    for p in request.points:
        numeric = transform_engine.laplace_nd(pair.function, p, request.quadrature).value
        closed = pair.transform(p.values[None, :])[0]
        error = float(np.max(np.abs(numeric - closed)) / max(float(np.max(np.abs(closed))), 1e-300))
        if error > request.tolerance:
            failed += 1
            logger.warning(f"{request.pair.value} at {p.values.tolist()}: relative error {error:.3e}")
        row = result_writer.complex_columns("lambda", p.values, indexed=True)
        row.update(result_writer.complex_columns("numeric", numeric))
        row.update(result_writer.complex_columns("closed_form", closed))
        row["rel_error"] = error
        rows.append(row)

    return ResultTable(
        command=Command.PAIRS,
        columns=list(rows[0].keys()),
        rows=rows,
        summary={"pair": request.pair.value, "tolerance": request.tolerance, "failed": failed},
        exit_code=2 if failed else 0,
    )
