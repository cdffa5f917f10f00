"""Bounded-variable revised simplex.

The program ``min c x  s.t.  lo <= A x <= hi,  l <= x <= u`` is solved in the
computational form ``[A  -I] (x, r) = 0`` where the row activities ``r`` are
bounded logical variables.  The basis is factorized with SuperLU and updated
in product form between refactorizations.

Two methods share the machinery:

* a dual simplex with bound-flipping ratio test, used whenever the slack
  basis is dual feasible (true for cost-minimizing dispatch models whose
  costs are non-negative);
* a two-phase primal simplex (phase 1 minimizes the sum of infeasibilities),
  used otherwise and for final cleanup.

Pricing is Dantzig/largest-infeasibility with lowest-index tie breaking.  After
a run of degenerate pivots the primal method switches to Bland's rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._kernels import basic_step, btran_full, dual_ratio, eta_append, ftran_full, leaving_row, pivot_row
from .model import LinearProgram

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

_LOWER, _UPPER, _FREE, _BASIC = 0, 1, 2, 3


@dataclass(frozen=True)
class Tolerances:
    """Solver and verification tolerances.

    ``feas`` (absolute row/bound residual) and ``gap`` (relative duality gap)
    are the externally checked quantities; the remaining fields steer the
    pivoting in the scaled problem.
    """

    feas: float = 1e-7
    gap: float = 1e-6
    comp: float = 1e-6
    primal: float = 1e-9
    dual: float = 1e-9
    pivot: float = 1e-9
    refactor_every: int = 150
    eta_fill: float = 20.0
    max_iter: int = 500_000
    bland_after: int = 50


@dataclass
class Solution:
    status: str
    x: np.ndarray
    row_duals: np.ndarray
    reduced_costs: np.ndarray
    objective: float
    row_activity: np.ndarray
    iterations: int = 0
    certificate: np.ndarray | None = None
    message: str = ""
    basis: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class SingularBasis(RuntimeError):
    pass


class _Factor:
    """LU of the basis (SuperLU ordering and factors) plus a product-form eta file.

    Triangular solves and eta applications run in compiled kernels; SuperLU's
    own ``solve`` carries too much per-call overhead for pivoting loops.
    """

    def __init__(self, B: sp.csc_matrix):
        try:
            lu = splu(B, permc_spec="COLAMD")
        except RuntimeError as exc:  # exactly singular
            raise SingularBasis(str(exc)) from exc
        m = B.shape[0]
        self.m = m
        self.perm_r = lu.perm_r.astype(np.int64)
        self.perm_c = lu.perm_c.astype(np.int64)
        self.L = _strip(lu.L, unit=True)
        self.U = _strip(lu.U, unit=False)
        self.Lt = _rows(self.L, m)
        self.Ut = _rows(self.U, m)
        if np.any(self.U[3] == 0.0):
            raise SingularBasis("zero pivot in U")
        self.neta = 0
        self.eta_nnz = 0
        cap = 64
        self._rows = np.empty(cap, dtype=np.int64)
        self._piv = np.empty(cap)
        self._ptr = np.zeros(cap + 1, dtype=np.int64)
        self._idx = np.empty(8 * m + 64, dtype=np.int64)
        self._val = np.empty(8 * m + 64)

    def _args(self):
        return (self.perm_r, self.perm_c, *self.L[:3], *self.U,
                self._rows, self._piv, self._ptr, self._idx, self._val, self.neta)

    def ftran(self, a: np.ndarray) -> np.ndarray:
        return ftran_full(*self._args(), np.asarray(a, dtype=float))

    def btran(self, c: np.ndarray) -> np.ndarray:
        return btran_full(self.perm_r, self.perm_c, *self.Lt, *self.Ut, self.U[3],
                          self._rows, self._piv, self._ptr, self._idx, self._val, self.neta,
                          np.asarray(c, dtype=float))

    def update(self, r: int, alpha: np.ndarray) -> None:
        k = self.neta
        if k + 1 >= self._rows.size:
            self._rows = np.resize(self._rows, 2 * self._rows.size)
            self._piv = np.resize(self._piv, 2 * self._piv.size)
            self._ptr = np.resize(self._ptr, 2 * self._ptr.size + 1)
        start = self._ptr[k]
        if start + self.m > self._idx.size:
            size = 2 * self._idx.size + self.m
            self._idx = np.resize(self._idx, size)
            self._val = np.resize(self._val, size)
        count = eta_append(alpha, r, self._idx, self._val, start)
        self._rows[k] = r
        self._piv[k] = alpha[r]
        self._ptr[k + 1] = start + count
        self.neta += 1
        self.eta_nnz += count


def _strip(T, unit: bool):
    """CSC arrays of a triangular factor without its diagonal (returned separately)."""
    T = sp.csc_matrix(T)
    T.sort_indices()
    coo = T.tocoo()
    off = coo.row != coo.col
    diag = np.zeros(T.shape[0])
    on = ~off
    diag[coo.col[on]] = coo.data[on]
    S = sp.csc_matrix((coo.data[off], (coo.row[off], coo.col[off])), shape=T.shape)
    ptr = S.indptr.astype(np.int64)
    idx = S.indices.astype(np.int64)
    val = S.data.astype(float)
    return ptr, idx, val, diag


def _rows(T, m: int):
    """Row-wise (CSR) arrays of a stripped CSC factor, for transposed solves."""
    ptr, idx, val = T[0], T[1], T[2]
    S = sp.csc_matrix((val, idx, ptr), shape=(m, m)).tocsr()
    S.sort_indices()
    return S.indptr.astype(np.int64), S.indices.astype(np.int64), S.data.astype(float)


def _scale(A: sp.csr_matrix, passes: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Geometric-mean equilibration; returns power-of-two row/col factors."""
    m, n = A.shape
    R = np.ones(m)
    S = np.ones(n)
    if A.nnz == 0:
        return R, S
    coo = A.tocoo()
    logabs = np.log2(np.abs(coo.data))
    rows, cols = coo.row, coo.col
    rcount = np.bincount(rows, minlength=m)
    ccount = np.bincount(cols, minlength=n)
    lr = np.zeros(m)
    lc = np.zeros(n)
    for _ in range(passes):
        v = logabs + lc[cols]
        lr = -np.bincount(rows, weights=v, minlength=m) / np.maximum(rcount, 1)
        v = logabs + lr[rows]
        lc = -np.bincount(cols, weights=v, minlength=n) / np.maximum(ccount, 1)
    R = np.exp2(np.round(lr))
    S = np.exp2(np.round(lc))
    return R, S


class _Simplex:
    def __init__(self, lp: LinearProgram, tol: Tolerances, start: np.ndarray | None = None):
        self.tol = tol
        self.lp = lp
        A = lp.A
        m, n = A.shape
        self.m, self.n = m, n
        rlo, rhi = lp.row_bounds()
        R, S = _scale(A)
        self.R, self.S = R, S
        As = sp.diags(R) @ A @ sp.diags(S)
        self.As = sp.csr_matrix(As)
        self.AsT = sp.csr_matrix(As.T)
        self._rowA = (self.As.indptr.astype(np.int64), self.As.indices.astype(np.int64), self.As.data)
        self.M = sp.hstack([As, -sp.identity(m, format="csc")], format="csc")
        c = np.concatenate([lp.cost * S, np.zeros(m)])
        cmax = np.abs(c).max() if c.size else 0.0
        self.cscale = 1.0 / cmax if cmax > 0 else 1.0
        self.c = c * self.cscale
        with np.errstate(invalid="ignore"):
            self.l = np.concatenate([lp.lb / S, rlo * R])
            self.u = np.concatenate([lp.ub / S, rhi * R])
        self.N = n + m
        self.boxed = np.isfinite(self.l) & np.isfinite(self.u)
        self.fixed = self.boxed & (self.l == self.u)
        self.iterations = 0
        self.certificate: np.ndarray | None = None
        self.ray: tuple[int, int, np.ndarray] | None = None
        if start is None or not self._warm_basis(start):
            self._slack_basis()

    # -- basis bookkeeping ------------------------------------------------
    def _slack_basis(self) -> None:
        n, m = self.n, self.m
        self.basis = np.arange(n, n + m)
        self.status = np.full(self.N, _BASIC, dtype=np.int8)
        self.x = np.zeros(self.N)
        cs = self.c[:n]
        l, u = self.l[:n], self.u[:n]
        st = np.where(np.isfinite(l), _LOWER, np.where(np.isfinite(u), _UPPER, _FREE))
        both = np.isfinite(l) & np.isfinite(u)
        st = np.where(both & (cs < 0), _UPPER, st)
        self.status[:n] = st
        self.x[:n] = np.where(st == _LOWER, l, np.where(st == _UPPER, u, 0.0))
        self.pos = np.full(self.N, -1, dtype=np.int64)
        self.pos[self.basis] = np.arange(m)
        self._refactor()

    def _warm_basis(self, start: np.ndarray) -> bool:
        """Install a basis from a previous solve of a same-shaped program."""
        start = np.asarray(start, dtype=np.int8)
        if start.shape != (self.N,):
            return False
        basis = np.flatnonzero(start == _BASIC)
        if basis.size != self.m:
            return False
        st = start.copy()
        nb = st != _BASIC
        # statuses pointing at a bound that no longer exists fall back to a finite one
        st = np.where(nb & (st == _LOWER) & ~np.isfinite(self.l), _UPPER, st)
        st = np.where(nb & (st == _UPPER) & ~np.isfinite(self.u), _FREE, st)
        st = np.where(nb & (st == _FREE) & np.isfinite(self.l), _LOWER, st)
        self.basis = basis
        self.status = st.astype(np.int8)
        self.x = np.where(st == _LOWER, self.l, np.where(st == _UPPER, self.u, 0.0))
        self.x[basis] = 0.0
        self.pos = np.full(self.N, -1, dtype=np.int64)
        self.pos[basis] = np.arange(self.m)
        try:
            self._refactor()
        except SingularBasis:
            return False
        # boxed nonbasics sit on the bound their reduced cost prefers
        _, d = self._duals(self.c)
        nbb = (self.status != _BASIC) & self.boxed & ~self.fixed
        to_up = nbb & (self.status == _LOWER) & (d < -self.tol.dual)
        to_lo = nbb & (self.status == _UPPER) & (d > self.tol.dual)
        if to_up.any() or to_lo.any():
            self.status[to_up] = _UPPER
            self.status[to_lo] = _LOWER
            self.x[to_up] = self.u[to_up]
            self.x[to_lo] = self.l[to_lo]
            self._recompute_primal()
        return True

    def _refactor(self) -> None:
        B = self.M[:, self.basis]
        self.F = _Factor(sp.csc_matrix(B))
        self.since_refactor = 0
        self._recompute_primal()

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        s, e = self.M.indptr[j], self.M.indptr[j + 1]
        col[self.M.indices[s:e]] = self.M.data[s:e]
        return col

    def _recompute_primal(self) -> None:
        xn = self.x.copy()
        xn[self.basis] = 0.0
        rhs = -(self.M @ xn)
        self.x[self.basis] = self.F.ftran(rhs)

    def _duals(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self.F.btran(cost[self.basis])
        d = cost - self._MT(y)
        d[self.basis] = 0.0
        return y, d

    def _MT(self, y: np.ndarray) -> np.ndarray:
        return np.concatenate([self.AsT @ y, -y])

    def _primal_infeas(self) -> np.ndarray:
        xb = self.x[self.basis]
        lb, ub = self.l[self.basis], self.u[self.basis]
        with np.errstate(invalid="ignore"):
            return np.maximum(np.maximum(lb - xb, xb - ub), 0.0)

    def _dual_infeas(self, d: np.ndarray) -> np.ndarray:
        st = self.status
        inf = np.zeros(self.N)
        inf = np.where(st == _LOWER, np.maximum(-d, 0.0), inf)
        inf = np.where(st == _UPPER, np.maximum(d, 0.0), inf)
        inf = np.where(st == _FREE, np.abs(d), inf)
        inf[self.fixed & (st != _BASIC)] = 0.0
        return inf

    def _pivot(self, r: int, q: int, alpha_q: np.ndarray, leave_status: int) -> None:
        p = self.basis[r]
        self.basis[r] = q
        self.pos[q] = r
        self.pos[p] = -1
        self.status[q] = _BASIC
        self.status[p] = leave_status
        self.F.update(r, alpha_q)
        self.since_refactor += 1
        if self.since_refactor >= self.tol.refactor_every or self.F.eta_nnz > self.tol.eta_fill * self.m + 1000:
            self._refactor()

    def _dual_feasible_start(self) -> bool:
        _, d = self._duals(self.c)
        return bool(self._dual_infeas(d).max(initial=0.0) <= self.tol.dual)

    # -- dual simplex -----------------------------------------------------
    def dual(self) -> str | None:
        """Run dual simplex phase 2. Returns status or None on loss of dual feasibility."""
        tol = self.tol
        _, d = self._duals(self.c)
        e = np.zeros(self.m)
        while True:
            if self.iterations >= tol.max_iter:
                return ITERATION_LIMIT
            if self.since_refactor == 0:
                _, d = self._duals(self.c)
                if self._dual_infeas(d).max(initial=0.0) > 1e3 * tol.dual:
                    return None
            r = leaving_row(self.x, self.basis, self.l, self.u, tol.primal)
            if r < 0:
                return OPTIMAL
            p = self.basis[r]
            xr = self.x[p]
            s = 1.0 if xr < self.l[p] else -1.0
            target = self.l[p] if s > 0 else self.u[p]
            e[r] = 1.0
            rho = self.F.btran(e)
            e[r] = 0.0
            t, cols = pivot_row(rho, -s, *self._rowA, self.n)
            q, lam, flips = dual_ratio(
                t, cols, d, self.status, self.l, self.u, self.boxed, self.fixed,
                abs(xr - target), tol.pivot, tol.dual, tol.primal,
            )
            if q < 0:
                self.certificate = rho
                return INFEASIBLE
            alpha_q = self.F.ftran(self._column(q))
            arq = alpha_q[r]
            if abs(arq) < tol.pivot or abs(arq + s * t[q]) > 1e-6 * (1.0 + abs(arq)):
                log.debug("pivot mismatch %.3e vs %.3e; refactoring", arq, -s * t[q])
                self._refactor()
                _, d = self._duals(self.c)
                continue
            d[cols] -= lam * t[cols]
            d[q] = 0.0
            d[p] = s * lam
            if flips.size:
                st = self.status[flips]
                delta = np.where(st == _LOWER, self.u[flips] - self.l[flips], self.l[flips] - self.u[flips])
                a = self.M[:, flips] @ delta
                basic_step(self.x, self.basis, self.F.ftran(a), 1.0)
                self.x[flips] += delta
                self.status[flips] = np.where(st == _LOWER, _UPPER, _LOWER)
            step = (self.x[p] - target) / arq
            basic_step(self.x, self.basis, alpha_q, step)
            self.x[q] += step
            self.x[p] = target
            self._pivot(r, q, alpha_q, _LOWER if s > 0 else _UPPER)
            d[self.basis[r]] = 0.0
            self.iterations += 1

    # -- primal simplex ---------------------------------------------------
    def primal(self) -> str:
        tol = self.tol
        degenerate = 0
        bland = False
        while True:
            if self.iterations >= tol.max_iter:
                return ITERATION_LIMIT
            basic = self.basis
            xb = self.x[basic]
            lb, ub = self.l[basic], self.u[basic]
            below = xb < lb - tol.primal
            above = xb > ub + tol.primal
            phase1 = bool(below.any() or above.any())
            if phase1:
                cost = np.zeros(self.N)
                cost[basic] = np.where(below, -1.0, np.where(above, 1.0, 0.0))
            else:
                cost = self.c
            y, d = self._duals(cost)
            st = self.status
            elig = ((st == _LOWER) & (d < -tol.dual)) | ((st == _UPPER) & (d > tol.dual)) | (
                (st == _FREE) & (np.abs(d) > tol.dual)
            )
            elig &= ~self.fixed
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                if phase1:
                    self.certificate = y
                    return INFEASIBLE
                return OPTIMAL
            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.F.ftran(self._column(q))
            rate = -direction * alpha
            theta, r, leave_at = self._primal_ratio(rate, phase1, bland)
            own = self.u[q] - self.l[q] if self.boxed[q] else np.inf
            if np.isfinite(own) and own <= theta:
                # bound flip of the entering variable
                self.x[basic] += own * rate
                self.x[q] += direction * own
                self.status[q] = _UPPER if direction > 0 else _LOWER
                self.iterations += 1
                degenerate = 0
                bland = False
                continue
            if not np.isfinite(theta):
                if phase1:
                    raise RuntimeError("phase 1 ray without blocking variable")
                self.ray = (q, int(direction), alpha)
                return UNBOUNDED
            p = int(basic[r])
            self.x[basic] += theta * rate
            self.x[q] += direction * theta
            self.x[p] = leave_at
            leave_status = _LOWER if leave_at == self.l[p] else _UPPER
            if self.fixed[p]:
                leave_status = _LOWER
            self._pivot(r, q, alpha, leave_status)
            self.iterations += 1
            if theta <= tol.primal:
                degenerate += 1
                if degenerate >= tol.bland_after:
                    bland = True
            else:
                degenerate = 0
                bland = False

    def _primal_ratio(self, rate: np.ndarray, phase1: bool, bland: bool) -> tuple[float, int, float]:
        tol = self.tol
        basic = self.basis
        xb = self.x[basic]
        lb, ub = self.l[basic], self.u[basic]
        big = np.abs(rate) > tol.pivot
        dec = big & (rate < 0)
        inc = big & (rate > 0)
        # bound reached per basic variable and the step to reach it (relaxed for Harris pass 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            if phase1:
                dec_bound = np.where(xb > ub + tol.primal, ub, lb)
                inc_bound = np.where(xb < lb - tol.primal, lb, ub)
            else:
                dec_bound, inc_bound = lb, ub
            bnd = np.where(dec, dec_bound, np.where(inc, inc_bound, np.nan))
            step = (bnd - xb) / rate
            relaxed = (bnd - xb + np.where(dec, -tol.primal, tol.primal)) / rate
        ok = (dec | inc) & np.isfinite(bnd)
        if phase1:
            ok &= ~(dec & (xb < lb - tol.primal)) & ~(inc & (xb > ub + tol.primal))
        if not ok.any():
            return np.inf, -1, 0.0
        step = np.where(ok, np.maximum(step, 0.0), np.inf)
        relaxed = np.where(ok, np.maximum(relaxed, 0.0), np.inf)
        if bland:
            tmin = step.min()
            ties = np.flatnonzero(step <= tmin + 1e-12)
            r = int(ties[np.argmin(basic[ties])])
        else:
            tmax = relaxed.min()
            near = np.flatnonzero(step <= tmax)
            r = int(near[np.argmax(np.abs(rate[near]))])
        return float(step[r]), r, float(bnd[r])

    # -- driver -----------------------------------------------------------
    def run(self) -> str:
        status = None
        if self._dual_feasible_start():
            status = self.dual()
        for _ in range(20):
            if status in (INFEASIBLE, UNBOUNDED, ITERATION_LIMIT):
                return status
            if status is None or status == OPTIMAL:
                self._refactor()
                _, d = self._duals(self.c)
                pinf = self._primal_infeas().max(initial=0.0)
                dinf = self._dual_infeas(d).max(initial=0.0)
                if status == OPTIMAL and pinf <= self.tol.primal and dinf <= self.tol.dual:
                    return OPTIMAL
                if pinf > self.tol.primal and dinf <= self.tol.dual:
                    status = self.dual()
                    continue
            status = self.primal()
        return status

    def extract(self, status: str) -> Solution:
        lp = self.lp
        n, m = self.n, self.m
        if status == OPTIMAL:
            self._refactor()
        y, d = self._duals(self.c)
        xs = self.x[:n]
        x = xs * self.S
        # snap nonbasic structurals onto their exact bounds
        nb = self.status[:n]
        x = np.where(nb == _LOWER, lp.lb, np.where(nb == _UPPER, lp.ub, x))
        row_duals = self.R * y / self.cscale
        rc = d[:n] / (self.S * self.cscale)
        activity = lp.A @ x
        obj = lp.objective(x)
        cert = None
        if status == INFEASIBLE and self.certificate is not None:
            cert = self.R * self.certificate
        elif status == UNBOUNDED and self.ray is not None:
            q, direction, alpha = self.ray
            ray = np.zeros(self.N)
            ray[self.basis] = -direction * alpha
            ray[q] = direction
            cert = ray[:n] * self.S
        return Solution(status, x, row_duals, rc, obj, activity, self.iterations, cert, basis=self.status.copy())


def solve(lp: LinearProgram, tol: Tolerances | None = None, warm_start=None) -> Solution:
    """Solve ``lp`` with the reference simplex; deterministic for identical input.

    ``warm_start`` may be the solution of a program with the same shape (for
    instance one differing only in right-hand sides), whose final basis is
    used as the starting point, or a status array from :func:`transfer_basis`.
    An unusable start silently falls back to the slack basis.
    """
    tol = tol or Tolerances()
    if lp.num_vars == 0:
        lo, hi = lp.row_bounds()
        ok = bool(np.all(lo <= 0.0) and np.all(hi >= 0.0))
        m = lp.num_rows
        return Solution(
            OPTIMAL if ok else INFEASIBLE,
            np.zeros(0), np.zeros(m), np.zeros(0), lp.obj_constant, np.zeros(m),
        )
    start = warm_start.basis if isinstance(warm_start, Solution) else warm_start
    solver = _Simplex(lp, tol, start)
    try:
        status = solver.run()
    except SingularBasis:
        log.warning("singular basis encountered; restarting from slack basis with Bland's rule")
        solver = _Simplex(lp, Tolerances(**{**tol.__dict__, "bland_after": 1, "refactor_every": 16}))
        status = solver.run()
    sol = solver.extract(status)
    log.debug("%s: %s after %d iterations, objective %.10g", lp.name, status, sol.iterations, sol.objective)
    return sol


def transfer_basis(src: LinearProgram, sol: Solution, dst: LinearProgram) -> np.ndarray | None:
    """Map the final basis of ``sol`` (a solve of ``src``) onto ``dst`` by name.

    Columns and rows are matched through their names.  Rows new to ``dst``
    get a basic slack, new columns start nonbasic.  When basic columns of
    ``src`` are missing from ``dst`` their place is taken by slacks of rows
    they appeared in.  Returns ``None`` if no basis of the right size results.
    """
    if sol.basis is None or sol.basis.shape != (src.num_vars + src.num_rows,):
        return None
    n, m = dst.num_vars, dst.num_rows
    st = np.full(n + m, _LOWER, dtype=np.int8)
    st[n:] = _BASIC
    old_v = {name: i for i, name in enumerate(src.variable_names())}
    old_r = {name: i for i, name in enumerate(src.row_names())}
    new_v = dst.variable_names()
    new_r = dst.row_names()
    used_v = np.zeros(src.num_vars, dtype=bool)
    for j, name in enumerate(new_v):
        i = old_v.get(name)
        if i is not None:
            st[j] = sol.basis[i]
            used_v[i] = True
    row_map = np.full(src.num_rows, -1, dtype=np.int64)
    for k, name in enumerate(new_r):
        i = old_r.get(name)
        if i is not None:
            st[n + k] = sol.basis[src.num_vars + i]
            row_map[i] = k
    # a column that sat at an upper bound which is now gone stays at its old
    # value by becoming basic in a new row whose slack is put on its bound
    new_rows = np.flatnonzero(st[n:] == _BASIC)
    is_new = np.ones(m, dtype=bool)
    is_new[row_map[row_map >= 0]] = False
    lost_ub = np.flatnonzero((st[:n] == _UPPER) & ~np.isfinite(dst.ub))
    if lost_ub.size and new_rows.size:
        Ac = dst.A.tocsc()
        _, rhi = dst.row_bounds()
        for j in lost_ub:
            for k in Ac.indices[Ac.indptr[j]:Ac.indptr[j + 1]]:
                if is_new[k] and st[n + k] == _BASIC:
                    st[j] = _BASIC
                    st[n + k] = _UPPER if np.isfinite(rhi[k]) else _LOWER
                    break
    short = int(m - np.count_nonzero(st == _BASIC))
    if short > 0:
        lost = np.flatnonzero(~used_v & (sol.basis[: src.num_vars] == _BASIC))
        At = src.A.tocsc()
        for j in lost:
            for i in At.indices[At.indptr[j]:At.indptr[j + 1]]:
                k = row_map[i]
                if k >= 0 and st[n + k] != _BASIC:
                    st[n + k] = _BASIC
                    short -= 1
                    break
            if short == 0:
                break
    if short != 0:
        return None
    return st
