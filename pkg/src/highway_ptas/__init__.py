"""Approximation schemes for highway pricing, tollbooth pricing on few-leaf trees,
and interval maximum feasible subsystem, with exact oracles for testing."""

from .dissection import Params, run_hptas
from .instance import (
    Driver,
    HighwayInstance,
    InternalConsistencyError,
    InvalidInput,
    SolveReport,
    profit,
)
from .maxfs import MaxFSInstance, Row, run_maxfs
from .tollbooth import TreeDriver, TreeInstance, run_tollbooth
from .wellround import well_round

__all__ = [
    "Driver", "HighwayInstance", "InternalConsistencyError", "InvalidInput", "MaxFSInstance", "Params",
    "Row", "SolveReport", "TreeDriver", "TreeInstance", "profit", "run_hptas", "run_maxfs",
    "run_tollbooth", "well_round",
]
__version__ = "0.1.0"
