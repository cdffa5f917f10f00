"""Independent optimality check of a claimed LP solution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import LinearProgram
from .simplex import Solution, Tolerances


@dataclass
class CheckReport:
    primal_residual: float = 0.0
    bound_violation: float = 0.0
    dual_violation: float = 0.0
    complementarity: float = 0.0
    primal_objective: float = 0.0
    dual_objective: float = 0.0
    relative_gap: float = 0.0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _dual_side(mult: np.ndarray, lo: np.ndarray, hi: np.ndarray, tol: float):
    """Dual contribution ``sum(mult * active_bound)`` and the worst sign violation.

    A positive multiplier prices the lower bound, a negative one the upper
    bound; a multiplier pointing at an infinite bound is dual infeasible.
    """
    pos = mult > 0
    neg = mult < 0
    with np.errstate(invalid="ignore"):
        term = np.where(pos, mult * lo, 0.0) + np.where(neg, mult * hi, 0.0)
    bad = (pos & ~np.isfinite(lo)) | (neg & ~np.isfinite(hi))
    violation = float(np.abs(mult[bad]).max(initial=0.0))
    term = np.where(bad, 0.0, term)
    return float(term.sum()), violation


def verify(lp: LinearProgram, sol: Solution, tol: Tolerances | None = None) -> CheckReport:
    """Recheck feasibility, dual feasibility, complementary slackness and gap.

    Everything is recomputed from ``lp`` and the primal/dual vectors; nothing
    the solver reported besides ``x`` and ``row_duals`` is trusted.
    """
    tol = tol or Tolerances()
    rep = CheckReport()
    if lp.num_vars == 0 and lp.num_rows == 0:
        rep.primal_objective = rep.dual_objective = lp.obj_constant
        return rep
    x = np.asarray(sol.x, dtype=float)
    y = np.asarray(sol.row_duals, dtype=float)
    A = lp.A
    lo, hi = lp.row_bounds()
    act = A @ x
    with np.errstate(invalid="ignore"):
        rep.primal_residual = float(np.maximum(np.maximum(lo - act, act - hi), 0.0).max(initial=0.0))
        rep.bound_violation = float(np.maximum(np.maximum(lp.lb - x, x - lp.ub), 0.0).max(initial=0.0))
    scale_x = 1.0 + float(np.abs(x).max(initial=0.0))
    if rep.primal_residual > tol.feas:
        rep.violations.append(f"row residual {rep.primal_residual:.3e}")
    if rep.bound_violation > tol.feas:
        rep.violations.append(f"bound violation {rep.bound_violation:.3e}")

    d = lp.cost - A.T @ y
    row_part, row_bad = _dual_side(y, lo, hi, tol.comp)
    col_part, col_bad = _dual_side(d, lp.lb, lp.ub, tol.comp)
    cscale = 1.0 + float(np.abs(lp.cost).max(initial=0.0))
    rep.dual_violation = max(row_bad, col_bad) / cscale
    if rep.dual_violation > tol.comp:
        rep.violations.append(f"dual infeasibility {rep.dual_violation:.3e}")

    # complementary slackness: multipliers only on active bounds
    with np.errstate(invalid="ignore"):
        slack_row = np.where(y > 0, act - lo, np.where(y < 0, hi - act, 0.0))
        slack_col = np.where(d > 0, x - lp.lb, np.where(d < 0, lp.ub - x, 0.0))
    slack_row = np.nan_to_num(slack_row, nan=0.0, posinf=0.0)
    slack_col = np.nan_to_num(slack_col, nan=0.0, posinf=0.0)
    comp = max(
        float(np.abs(y * slack_row).max(initial=0.0)),
        float(np.abs(d * slack_col).max(initial=0.0)),
    )
    rep.complementarity = comp / (cscale * scale_x)
    if rep.complementarity > tol.comp:
        rep.violations.append(f"complementary slackness {rep.complementarity:.3e}")

    rep.primal_objective = lp.objective(x)
    rep.dual_objective = row_part + col_part + lp.obj_constant
    denom = max(1.0, abs(rep.primal_objective), abs(rep.dual_objective))
    rep.relative_gap = abs(rep.primal_objective - rep.dual_objective) / denom
    if rep.relative_gap > tol.gap:
        rep.violations.append(f"duality gap {rep.relative_gap:.3e}")
    return rep
