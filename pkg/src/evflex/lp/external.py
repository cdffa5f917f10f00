"""Adapter to an external solver (HiGHS through SciPy).

The reference simplex is the default everywhere; this adapter exists for
large runs and for cross-checking.  Duals are converted to the package
convention: the row dual is the derivative of the optimal objective with
respect to the row's right-hand side.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .model import EQ, GE, LE, LinearProgram
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, Solution

_STATUS = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}


def solve_highs(lp: LinearProgram) -> Solution:
    A = lp.A.tocsr()
    sense = lp.sense
    rhs = lp.rhs
    le = np.flatnonzero(sense == LE)
    ge = np.flatnonzero(sense == GE)
    eq = np.flatnonzero(sense == EQ)
    ub_rows = np.concatenate([le, ge])
    sign = np.concatenate([np.ones(le.size), -np.ones(ge.size)])
    A_ub = A[ub_rows].multiply(sign[:, None]).tocsr() if ub_rows.size else None
    b_ub = rhs[ub_rows] * sign if ub_rows.size else None
    A_eq = A[eq] if eq.size else None
    b_eq = rhs[eq] if eq.size else None
    bounds = np.column_stack([lp.lb, lp.ub])
    bounds = [(None if not np.isfinite(a) else a, None if not np.isfinite(b) else b) for a, b in bounds]
    res = linprog(lp.cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    status = _STATUS.get(res.status, "error")
    m, n = lp.num_rows, lp.num_vars
    if status != OPTIMAL:
        return Solution(status, np.full(n, np.nan), np.zeros(m), np.zeros(n), np.nan, np.zeros(m), message=res.message)
    y = np.zeros(m)
    if ub_rows.size:
        y[ub_rows] = res.ineqlin.marginals * sign
    if eq.size:
        y[eq] = res.eqlin.marginals
    x = np.asarray(res.x)
    rc = lp.cost - A.T @ y
    return Solution(
        OPTIMAL, x, y, rc, lp.objective(x), A @ x, int(getattr(res, "nit", 0)), message=res.message
    )
