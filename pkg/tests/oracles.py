"""Independent reference computations used by the tests.

Nothing here imports the solver; the vertex enumeration works on plain
numpy arrays.
"""

from __future__ import annotations

import itertools

import numpy as np

from evflex.lp import EQ, GE, LE, LinearProgram


def random_bounded_lp(rng: np.random.Generator, max_vars: int = 6, max_rows: int = 6) -> LinearProgram:
    """Random feasible LP with finite bounds on every variable.

    A point inside the box is drawn first and every row is made to hold at
    it, some with zero slack so that degenerate vertices show up.
    """
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    lb = np.round(rng.uniform(-5, 1, n), 2)
    ub = lb + np.round(rng.uniform(0.5, 8, n), 2)
    fixed = rng.random(n) < 0.05
    ub[fixed] = lb[fixed]
    x0 = lb + rng.random(n) * (ub - lb)
    A = np.round(rng.uniform(-5, 5, (m, n)), 2)
    A[rng.random((m, n)) < 0.3] = 0.0
    senses = rng.choice([LE, GE, EQ], size=m, p=[0.45, 0.4, 0.15])
    act = A @ x0
    slack = np.where(rng.random(m) < 0.2, 0.0, rng.uniform(0, 3, m))
    rhs = np.where(senses == LE, act + slack, np.where(senses == GE, act - slack, act))
    cost = np.round(rng.uniform(-5, 5, n), 2)
    cost[rng.random(n) < 0.15] = 0.0
    lp = LinearProgram(name="rand")
    lp.add_variables(n, lb, ub, cost, "x")
    r, c = np.nonzero(A)
    lp.add_constraints(m, r, c, A[r, c], senses, rhs, "r")
    return lp


def enumerate_vertices(lp: LinearProgram, tol: float = 1e-9) -> float:
    """Optimal objective of a bounded LP by brute force over all vertices.

    Every choice of ``n`` linearly independent hyperplanes among the row
    and bound hyperplanes gives a candidate point; the best feasible one is
    optimal because the feasible set is a polytope.  Returns ``nan`` when no
    vertex is feasible.
    """
    A = lp.A.toarray()
    n = lp.num_vars
    lo, hi = lp.row_bounds()
    lb, ub = lp.lb, lp.ub
    planes, rhs = [], []
    for i in range(lp.num_rows):
        b = lo[i] if np.isfinite(lo[i]) else hi[i]
        planes.append(A[i])
        rhs.append(b)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes.append(e)
        rhs.append(lb[j])
        planes.append(e)
        rhs.append(ub[j])
    H = np.array(planes)
    h = np.array(rhs)
    combos = np.array(list(itertools.combinations(range(len(planes)), n)))
    M = H[combos]
    det = np.linalg.det(M)
    keep = np.abs(det) > 1e-10
    M, combos = M[keep], combos[keep]
    pts = np.linalg.solve(M, h[combos][..., None])[..., 0]
    act = pts @ A.T
    scale = 1.0 + np.abs(np.r_[lo[np.isfinite(lo)], hi[np.isfinite(hi)]]).max(initial=0.0)
    ok = np.all(pts >= lb - tol * scale, axis=1) & np.all(pts <= ub + tol * scale, axis=1)
    ok &= np.all(act >= lo - tol * scale, axis=1) & np.all(act <= hi + tol * scale, axis=1)
    if not ok.any():
        return float("nan")
    return float((pts[ok] @ lp.cost).min() + lp.obj_constant)


def farkas_separates(lp: LinearProgram, y: np.ndarray, tol: float = 1e-7) -> bool:
    """True when ``y`` proves infeasibility of ``lp``.

    Any feasible ``x`` would give ``y @ (A x)`` both inside the range reached
    by ``x`` over its box and inside the range allowed by the row bounds;
    the certificate is valid when those two intervals are disjoint.
    """
    z = lp.A.T @ y
    lb, ub = lp.lb, lp.ub
    lo, hi = lp.row_bounds()

    def interval(coef, low, high):
        with np.errstate(invalid="ignore"):
            a = np.where(coef > 0, coef * low, np.where(coef < 0, coef * high, 0.0))
            b = np.where(coef > 0, coef * high, np.where(coef < 0, coef * low, 0.0))
        return float(np.sum(a)), float(np.sum(b))

    xmin, xmax = interval(z, lb, ub)
    rmin, rmax = interval(y, lo, hi)
    scale = 1.0 + float(np.abs(y).max(initial=0.0))
    return xmax < rmin - tol * scale or xmin > rmax + tol * scale


def cycle_cost(charged, soc_max, repl, cyc=4e-5, oversize=1.1, lifetime=0.25):
    return cyc * repl / lifetime * charged / (oversize * soc_max)


def calendar_cost(soc, soc_max, repl, const=6e-7, flex=9e-7, oversize=1.1, lifetime=0.25):
    return (const + flex * soc / (oversize * soc_max)) * repl / lifetime
