from .base import INFEASIBLE, base_profit, block_base_profit, weak_compositions
from .params import Params
from .reconstruct import DissectionNode, GoodDriverRecord, Reconstruction, check_scaled_good_drivers, reconstruct
from .solver import (
    BACKENDS,
    MODES,
    evaluate_draw,
    optimal_dissection_value,
    padded_optimum,
    run_hptas,
    w_star_guesses,
)
from .table import BoundedLine, CompressedTable, EdgeTable, SplitChoice, bound, dp_step, good_driver_term

__all__ = [
    "BACKENDS", "INFEASIBLE", "MODES", "BoundedLine", "CompressedTable", "DissectionNode", "EdgeTable",
    "GoodDriverRecord", "Params", "Reconstruction", "SplitChoice", "base_profit", "block_base_profit",
    "bound", "check_scaled_good_drivers", "dp_step", "evaluate_draw", "good_driver_term", "optimal_dissection_value",
    "padded_optimum", "reconstruct", "run_hptas", "w_star_guesses", "weak_compositions",
]
