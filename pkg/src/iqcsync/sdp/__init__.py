"""LMI modeling layer and the bundled dense-SDP interior-point backend."""

from .expr import MatExpr, VarSpace, blockmat, const, scalar_times
from .ipm import ConeBlock, IpmResult, ipm_solve
from .problem import LmiProblem, LmiSolution, solve
from .riccati import ResidualReport, schur_reduce

__all__ = [
    "MatExpr",
    "VarSpace",
    "blockmat",
    "const",
    "scalar_times",
    "ConeBlock",
    "IpmResult",
    "ipm_solve",
    "LmiProblem",
    "LmiSolution",
    "solve",
    "ResidualReport",
    "schur_reduce",
]
