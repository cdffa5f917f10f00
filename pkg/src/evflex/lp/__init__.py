"""Linear-programming layer: model container, reference simplex, checks, LP text IO."""

from .lpformat import dumps, loads, read_lp, write_lp
from .model import EQ, GE, INF, LE, LinearProgram, ModelError
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, Solution, Tolerances, solve, transfer_basis
from .verify import CheckReport, verify

__all__ = [
    "EQ", "GE", "INF", "LE", "LinearProgram", "ModelError",
    "INFEASIBLE", "OPTIMAL", "UNBOUNDED", "Solution", "Tolerances", "solve", "transfer_basis",
    "CheckReport", "verify", "dumps", "loads", "read_lp", "write_lp",
]
