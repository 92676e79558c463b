"""
Pydantic models for parameters, configurations, results and CLI requests.
"""

from .special import *
from .transform import *
from .operational import *
from .inversion import *
from .problems import *
from .run import *
