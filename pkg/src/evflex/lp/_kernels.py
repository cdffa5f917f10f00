"""Compiled inner loops of the simplex: triangular solves, eta file, dual ratio test."""

from __future__ import annotations

import numpy as np
from numba import njit

_LOWER, _UPPER, _FREE, _BASIC = 0, 1, 2, 3


@njit(cache=True)
def lower_unit_solve(ptr, idx, val, x):
    """In place ``L x = b`` for unit lower-triangular CSC ``L`` (diagonal stripped)."""
    n = x.shape[0]
    for j in range(n):
        xj = x[j]
        if xj != 0.0:
            for k in range(ptr[j], ptr[j + 1]):
                x[idx[k]] -= val[k] * xj


@njit(cache=True)
def upper_solve(ptr, idx, val, diag, x):
    """In place ``U x = b`` for upper-triangular CSC ``U`` (diagonal in ``diag``)."""
    n = x.shape[0]
    for j in range(n - 1, -1, -1):
        xj = x[j] / diag[j]
        x[j] = xj
        if xj != 0.0:
            for k in range(ptr[j], ptr[j + 1]):
                x[idx[k]] -= val[k] * xj


@njit(cache=True)
def lower_unit_solve_t(ptr, idx, val, x):
    """In place ``L^T x = b``."""
    n = x.shape[0]
    for j in range(n - 1, -1, -1):
        s = x[j]
        for k in range(ptr[j], ptr[j + 1]):
            s -= val[k] * x[idx[k]]
        x[j] = s


@njit(cache=True)
def upper_solve_t(ptr, idx, val, diag, x):
    """In place ``U^T x = b``."""
    n = x.shape[0]
    for j in range(n):
        s = x[j]
        for k in range(ptr[j], ptr[j + 1]):
            s -= val[k] * x[idx[k]]
        x[j] = s / diag[j]


@njit(cache=True)
def lower_unit_solve_rows_t(rptr, ridx, rval, x):
    """In place ``L^T x = b`` with ``L`` given by rows; skips zero entries."""
    n = x.shape[0]
    for j in range(n - 1, -1, -1):
        xj = x[j]
        if xj != 0.0:
            for k in range(rptr[j], rptr[j + 1]):
                x[ridx[k]] -= rval[k] * xj


@njit(cache=True)
def upper_solve_rows_t(rptr, ridx, rval, diag, x):
    """In place ``U^T x = b`` with ``U`` given by rows; skips zero entries."""
    n = x.shape[0]
    for j in range(n):
        xj = x[j]
        if xj != 0.0:
            xj /= diag[j]
            x[j] = xj
            for k in range(rptr[j], rptr[j + 1]):
                x[ridx[k]] -= rval[k] * xj


@njit(cache=True)
def eta_ftran(rows, piv, ptr, idx, val, neta, x):
    for e in range(neta):
        r = rows[e]
        xr = x[r] / piv[e]
        if xr != 0.0:
            for k in range(ptr[e], ptr[e + 1]):
                x[idx[k]] -= xr * val[k]
        x[r] = xr


@njit(cache=True)
def eta_btran(rows, piv, ptr, idx, val, neta, y):
    for e in range(neta - 1, -1, -1):
        r = rows[e]
        s = y[r]
        for k in range(ptr[e], ptr[e + 1]):
            s -= y[idx[k]] * val[k]
        y[r] = s / piv[e]


@njit(cache=True)
def dual_ratio(t, cols, d, status, l, u, boxed, fixed, slope, tol_piv, tol_dual, tol_primal):
    """Bound-flipping ratio test of the dual simplex.

    ``t`` is the signed pivot row (positive entries let a variable at its
    lower bound enter) and ``cols`` the positions where it may be nonzero.
    Returns ``(q, lam, flips)``; ``q == -1`` means no entering candidate
    exists (primal infeasible).
    """
    n = cols.shape[0]
    cand = np.empty(n, dtype=np.int64)
    ratio = np.empty(n)
    nc = 0
    for jj in range(n):
        j = cols[jj]
        st = status[j]
        if st == _BASIC or fixed[j]:
            continue
        tj = t[j]
        if st == _LOWER:
            if tj <= tol_piv:
                continue
            r = d[j] / tj
        elif st == _UPPER:
            if tj >= -tol_piv:
                continue
            r = d[j] / tj
        else:
            if abs(tj) <= tol_piv:
                continue
            r = abs(d[j]) / abs(tj)
        if r < 0.0:
            r = 0.0
        cand[nc] = j
        ratio[nc] = r
        nc += 1
    flips = np.empty(0, dtype=np.int64)
    if nc == 0:
        return -1, 0.0, flips
    cand = cand[:nc]
    ratio = ratio[:nc]
    order = np.argsort(ratio, kind="mergesort")
    k = 0
    nflip = 0
    fl = np.empty(nc, dtype=np.int64)
    while k < nc:
        j = cand[order[k]]
        if boxed[j] and status[j] != _FREE:
            dec = abs(t[j]) * (u[j] - l[j])
            if slope - dec > tol_primal:
                fl[nflip] = j
                nflip += 1
                slope -= dec
                k += 1
                continue
        break
    if k == nc:
        return -1, 0.0, flips
    # Harris pass over the remaining candidates: largest pivot within the relaxed bound.
    bound = np.inf
    for kk in range(k, nc):
        j = cand[order[kk]]
        tj = t[j]
        if status[j] == _FREE:
            h = (abs(d[j]) + tol_dual) / abs(tj)
        else:
            h = (d[j] + np.sign(tj) * tol_dual) / tj
        if h < bound:
            bound = h
    best = -1
    best_piv = -1.0
    for kk in range(k, nc):
        o = order[kk]
        if ratio[o] > bound:
            break
        j = cand[o]
        if abs(t[j]) > best_piv:
            best_piv = abs(t[j])
            best = o
    if best < 0:
        best = order[k]
    q = cand[best]
    lam = ratio[best]
    if status[q] == _FREE:
        lam = d[q] / t[q]
    return q, lam, fl[:nflip].copy()


@njit(cache=True)
def leaving_row(x, basis, l, u, tol):
    """Basic position with the largest bound violation, ``-1`` if primal feasible."""
    best = -1
    worst = tol
    for r in range(basis.shape[0]):
        p = basis[r]
        v = x[p]
        viol = l[p] - v
        if v - u[p] > viol:
            viol = v - u[p]
        if viol > worst:
            worst = viol
            best = r
    return best


@njit(cache=True)
def ftran_full(perm_r, perm_c, lp, li, lv, up, ui, uv, ud, rows, piv, ptr, idx, val, neta, a):
    """``B^{-1} a`` through the LU factors and the eta file in one call."""
    m = a.shape[0]
    z = np.empty(m)
    for i in range(m):
        z[perm_r[i]] = a[i]
    lower_unit_solve(lp, li, lv, z)
    upper_solve(up, ui, uv, ud, z)
    x = np.empty(m)
    for i in range(m):
        x[i] = z[perm_c[i]]
    eta_ftran(rows, piv, ptr, idx, val, neta, x)
    return x


@njit(cache=True)
def btran_full(perm_r, perm_c, ltp, lti, ltv, utp, uti, utv, ud, rows, piv, ptr, idx, val, neta, c):
    """``B^{-T} c`` through the eta file and the LU factors in one call."""
    m = c.shape[0]
    y = c.copy()
    eta_btran(rows, piv, ptr, idx, val, neta, y)
    u = np.empty(m)
    for i in range(m):
        u[perm_c[i]] = y[i]
    upper_solve_rows_t(utp, uti, utv, ud, u)
    lower_unit_solve_rows_t(ltp, lti, ltv, u)
    out = np.empty(m)
    for i in range(m):
        out[i] = u[perm_r[i]]
    return out


@njit(cache=True)
def eta_append(alpha, r, idx, val, start):
    """Copy the off-pivot nonzeros of ``alpha`` into the eta arrays; returns the count."""
    k = start
    for i in range(alpha.shape[0]):
        if i != r and alpha[i] != 0.0:
            idx[k] = i
            val[k] = alpha[i]
            k += 1
    return k - start


@njit(cache=True)
def basic_step(x, basis, alpha, step):
    for i in range(basis.shape[0]):
        x[basis[i]] -= step * alpha[i]



@njit(cache=True)
def pivot_row(rho, sign, ptr, idx, val, n):
    """``sign * [A^T rho, -rho]`` from the rows of ``A`` (CSR) and its nonzero positions."""
    m = rho.shape[0]
    t = np.zeros(n + m)
    mark = np.zeros(n + m, dtype=np.bool_)
    nz = np.empty(n + m, dtype=np.int64)
    cnt = 0
    for i in range(m):
        ri = rho[i]
        if ri == 0.0:
            continue
        for k in range(ptr[i], ptr[i + 1]):
            j = idx[k]
            t[j] += sign * val[k] * ri
            if not mark[j]:
                mark[j] = True
                nz[cnt] = j
                cnt += 1
        t[n + i] = -sign * ri
        nz[cnt] = n + i
        cnt += 1
    return t, nz[:cnt].copy()
