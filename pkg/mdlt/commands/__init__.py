"""
Command handlers for the mdlt CLI.

Each handler validates its input document with the command's request model
and returns a ResultTable.
"""

from typing import Any, Callable, Dict

from mdlt.models.run import Command, ResultTable
from .transform import handle as transform_handler
from .invert import handle as invert_handler
from .region import handle as region_handler
from .pairs import handle as pairs_handler
from .solve import handle as solve_handler
from .schedule import handle as schedule_handler

Handler = Callable[[Dict[str, Any], int], ResultTable]

# Command -> handler table
command_handlers: Dict[Command, Handler] = {
    Command.TRANSFORM: transform_handler,
    Command.INVERT: invert_handler,
    Command.REGION: region_handler,
    Command.PAIRS: pairs_handler,
    Command.SOLVE: solve_handler,
    Command.SCHEDULE: schedule_handler,
}
