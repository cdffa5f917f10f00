"""Sparse linear program container.

Variables and rows are added in blocks (numpy arrays) so that models with
tens of thousands of columns can be assembled without Python-level loops.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

INF = np.inf

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)
_NAME_BAD = re.compile(r"[^A-Za-z0-9_.()#,]")


class ModelError(ValueError):
    """Raised for structurally invalid linear programs."""


def _sanitize(name: str) -> str:
    name = _NAME_BAD.sub("_", name)
    if not name or not (name[0].isalpha() or name[0] == "_") or name[0] in "eE":
        name = "_" + name
    return name


@dataclass
class _Block:
    start: int
    count: int
    name: str


@dataclass
class LinearProgram:
    """``min c @ x + obj_constant`` subject to sparse rows and variable bounds.

    Rows are stored with a sense and a right-hand side.  Variables carry
    their own lower/upper bounds (``-inf``/``inf`` allowed).
    """

    name: str = "lp"
    obj_constant: float = 0.0
    _lb: list = field(default_factory=list, repr=False)
    _ub: list = field(default_factory=list, repr=False)
    _cost: list = field(default_factory=list, repr=False)
    _vblocks: list = field(default_factory=list, repr=False)
    _rows: list = field(default_factory=list, repr=False)
    _cols: list = field(default_factory=list, repr=False)
    _vals: list = field(default_factory=list, repr=False)
    _sense: list = field(default_factory=list, repr=False)
    _rhs: list = field(default_factory=list, repr=False)
    _rblocks: list = field(default_factory=list, repr=False)
    num_vars: int = 0
    num_rows: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    # -- construction ---------------------------------------------------
    def add_variables(self, count: int, lb=0.0, ub=INF, cost=0.0, name: str = "x") -> np.ndarray:
        """Add ``count`` variables; returns their integer ids."""
        count = int(count)
        lb = np.broadcast_to(np.asarray(lb, dtype=float), (count,)).copy()
        ub = np.broadcast_to(np.asarray(ub, dtype=float), (count,)).copy()
        cost = np.broadcast_to(np.asarray(cost, dtype=float), (count,)).copy()
        if np.any(np.isnan(lb)) or np.any(np.isnan(ub)) or np.any(np.isnan(cost)):
            raise ModelError(f"NaN in bounds or cost of block {name!r}")
        if np.any(lb > ub):
            raise ModelError(f"lower bound above upper bound in block {name!r}")
        if np.any(np.isinf(cost)):
            raise ModelError(f"infinite cost in block {name!r}")
        ids = np.arange(self.num_vars, self.num_vars + count)
        self._lb.append(lb)
        self._ub.append(ub)
        self._cost.append(cost)
        self._vblocks.append(_Block(self.num_vars, count, _sanitize(name)))
        self.num_vars += count
        self._cache.clear()
        return ids

    def add_variable(self, lb=0.0, ub=INF, cost=0.0, name: str = "x") -> int:
        return int(self.add_variables(1, lb, ub, cost, name)[0])

    def add_constraints(self, count, rows, cols, vals, sense, rhs, name: str = "c") -> np.ndarray:
        """Add ``count`` rows given COO triplets with *local* row indices.

        ``sense`` is a single sense string or an array of them; ``rhs`` is a
        scalar or array.  Explicit zero coefficients are dropped.
        """
        count = int(count)
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        vals = np.broadcast_to(vals, rows.shape) if vals.size == 1 else vals
        if not (rows.shape == cols.shape == vals.shape):
            raise ModelError("row/col/value arrays differ in length")
        if rows.size and (rows.min() < 0 or rows.max() >= count):
            raise ModelError(f"local row index out of range in block {name!r}")
        if cols.size and (cols.min() < 0 or cols.max() >= self.num_vars):
            raise ModelError(f"row block {name!r} references unknown variable")
        if np.any(~np.isfinite(vals)):
            raise ModelError(f"non-finite coefficient in block {name!r}")
        keep = vals != 0.0
        sense = np.broadcast_to(np.asarray(sense, dtype=object), (count,)).copy()
        if not set(sense.tolist()) <= set(_SENSES):
            raise ModelError(f"unknown row sense in block {name!r}")
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (count,)).copy()
        if np.any(np.isnan(rhs)):
            raise ModelError(f"NaN right-hand side in block {name!r}")
        ids = np.arange(self.num_rows, self.num_rows + count)
        self._rows.append(rows[keep] + self.num_rows)
        self._cols.append(cols[keep])
        self._vals.append(np.array(vals[keep]))
        self._sense.append(sense)
        self._rhs.append(rhs)
        self._rblocks.append(_Block(self.num_rows, count, _sanitize(name)))
        self.num_rows += count
        self._cache.clear()
        return ids

    def add_constraint(self, coeffs: dict, sense: str, rhs: float, name: str = "c") -> int:
        cols = np.fromiter(coeffs.keys(), dtype=np.int64, count=len(coeffs))
        vals = np.fromiter(coeffs.values(), dtype=float, count=len(coeffs))
        return int(self.add_constraints(1, np.zeros(len(cols)), cols, vals, sense, rhs, name)[0])

    def add_cost(self, ids, values) -> None:
        """Add ``values`` to the objective coefficients of variables ``ids``."""
        ids = np.asarray(ids, dtype=np.int64).ravel()
        values = np.broadcast_to(np.asarray(values, dtype=float), ids.shape)
        if np.any(~np.isfinite(values)):
            raise ModelError("non-finite objective coefficient")
        starts = np.array([b.start for b in self._vblocks], dtype=np.int64)
        which = np.searchsorted(starts, ids, side="right") - 1
        for k in np.unique(which):
            sel = which == k
            np.add.at(self._cost[k], ids[sel] - starts[k], values[sel])
        self._cache.clear()

    def set_rhs(self, row: int, value: float) -> None:
        """Change the right-hand side of one row in place."""
        for blk, rhs in zip(self._rblocks, self._rhs):
            if blk.start <= row < blk.start + blk.count:
                rhs[row - blk.start] = value
                self._cache.clear()
                return
        raise IndexError(row)

    def copy(self) -> "LinearProgram":
        other = LinearProgram(name=self.name, obj_constant=self.obj_constant)
        for attr in ("_lb", "_ub", "_cost", "_rows", "_cols", "_vals", "_sense", "_rhs"):
            setattr(other, attr, [a.copy() for a in getattr(self, attr)])
        other._vblocks = list(self._vblocks)
        other._rblocks = list(self._rblocks)
        other.num_vars, other.num_rows = self.num_vars, self.num_rows
        return other

    # -- views ----------------------------------------------------------
    def _cat(self, key, parts, dtype=float):
        if key not in self._cache:
            self._cache[key] = np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)
        return self._cache[key]

    @property
    def lb(self) -> np.ndarray:
        return self._cat("lb", self._lb)

    @property
    def ub(self) -> np.ndarray:
        return self._cat("ub", self._ub)

    @property
    def cost(self) -> np.ndarray:
        return self._cat("cost", self._cost)

    @property
    def sense(self) -> np.ndarray:
        return self._cat("sense", self._sense, dtype=object)

    @property
    def rhs(self) -> np.ndarray:
        return self._cat("rhs", self._rhs)

    @property
    def A(self) -> sp.csr_matrix:
        """Constraint matrix in CSR form (duplicates summed)."""
        if "A" not in self._cache:
            rows = np.concatenate(self._rows) if self._rows else np.zeros(0, dtype=np.int64)
            cols = np.concatenate(self._cols) if self._cols else np.zeros(0, dtype=np.int64)
            vals = np.concatenate(self._vals) if self._vals else np.zeros(0)
            A = sp.csr_matrix((vals, (rows, cols)), shape=(self.num_rows, self.num_vars))
            A.sum_duplicates()
            A.eliminate_zeros()
            self._cache["A"] = A
        return self._cache["A"]

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Row activity bounds ``(lo, hi)`` implied by sense and rhs."""
        sense, rhs = self.sense, self.rhs
        lo = np.where(sense == LE, -INF, rhs)
        hi = np.where(sense == GE, INF, rhs)
        return lo.astype(float), hi.astype(float)

    def variable_names(self) -> list[str]:
        names = []
        for blk in self._vblocks:
            if blk.count == 1:
                names.append(blk.name)
            else:
                names.extend(f"{blk.name}#{k}" for k in range(blk.count))
        return _dedupe(names)

    def row_names(self) -> list[str]:
        names = []
        for blk in self._rblocks:
            if blk.count == 1:
                names.append(blk.name)
            else:
                names.extend(f"{blk.name}#{k}" for k in range(blk.count))
        return _dedupe(names)

    def objective(self, x: np.ndarray) -> float:
        return float(self.cost @ x + self.obj_constant)

    def structure_equal(self, other: "LinearProgram") -> bool:
        """Exact row-level equality of two programs (names ignored)."""
        if (self.num_vars, self.num_rows) != (other.num_vars, other.num_rows):
            return False
        if self.obj_constant != other.obj_constant:
            return False
        for a, b in ((self.lb, other.lb), (self.ub, other.ub), (self.cost, other.cost), (self.rhs, other.rhs)):
            if not np.array_equal(a, b):
                return False
        if not np.array_equal(self.sense, other.sense):
            return False
        diff = self.A - other.A
        return diff.count_nonzero() == 0


def _dedupe(names: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for n in names:
        if n in seen:
            seen[n] += 1
            n = f"{n}.{seen[n]}"
        else:
            seen[n] = 0
        out.append(n)
    return out
