"""Plain-text LP interchange format (a strict subset of the CPLEX LP dialect).

Grammar, one statement per line::

    \\ comment
    Minimize
     obj: <term> (+|- <term>)*          term = <coef> <name> | <constant>
    Subject To
     <row>: <term> (+|- <term>)* (<=|>=|=) <rhs>
    Bounds
     <lo> <= <name> <= <hi>
     <name> >= <lo>
     <name> = <value>
     <name> free
    End

Numbers are written with ``repr`` so that a write/read cycle reproduces
every coefficient bit-for-bit.  Every variable is listed in ``Bounds`` in
column order; the reader uses that order for the columns.
"""

from __future__ import annotations

import io
import math
from pathlib import Path

import numpy as np

from .model import EQ, GE, INF, LE, LinearProgram, ModelError

_SECTIONS = {"minimize": "obj", "subject to": "rows", "bounds": "bounds", "end": "end"}


def _num(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return repr(float(v))


def _terms(cols, vals, names) -> str:
    parts = []
    for j, v in zip(cols, vals):
        sign = "-" if v < 0 or (v == 0 and math.copysign(1.0, v) < 0) else "+"
        parts.append(f"{sign} {_num(abs(v))} {names[j]}")
    return " ".join(parts)


def write_lp(lp: LinearProgram, dest) -> None:
    """Write ``lp`` to a path or text stream."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            write_lp(lp, fh)
        return
    vnames = lp.variable_names()
    rnames = lp.row_names()
    out = dest
    out.write(f"\\ {lp.name}\nMinimize\n obj:")
    cost = lp.cost
    nz = np.flatnonzero(cost)
    if nz.size:
        out.write(" " + _terms(nz, cost[nz], vnames))
    if lp.obj_constant != 0.0 or not nz.size:
        out.write(f" + {_num(lp.obj_constant)}" if lp.obj_constant >= 0 else f" - {_num(-lp.obj_constant)}")
    out.write("\nSubject To\n")
    A = lp.A
    for i, (sense, rhs) in enumerate(zip(lp.sense, lp.rhs)):
        s, e = A.indptr[i], A.indptr[i + 1]
        body = _terms(A.indices[s:e], A.data[s:e], vnames) if e > s else "+ 0.0"
        out.write(f" {rnames[i]}: {body} {sense} {_num(rhs)}\n")
    out.write("Bounds\n")
    for name, lo, hi in zip(vnames, lp.lb, lp.ub):
        if lo == -INF and hi == INF:
            out.write(f" {name} free\n")
        elif lo == hi:
            out.write(f" {name} = {_num(lo)}\n")
        elif hi == INF:
            out.write(f" {name} >= {_num(lo)}\n")
        else:
            out.write(f" {_num(lo)} <= {name} <= {_num(hi)}\n")
    out.write("End\n")


def dumps(lp: LinearProgram) -> str:
    buf = io.StringIO()
    write_lp(lp, buf)
    return buf.getvalue()


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _parse_expr(tokens: list[str], where: str) -> tuple[dict[str, float], float]:
    """Parse ``(+|-)? coef? name ...`` into coefficients and a constant."""
    coefs: dict[str, float] = {}
    const = 0.0
    k = 0
    while k < len(tokens):
        sign = 1.0
        if tokens[k] in "+-":
            sign = -1.0 if tokens[k] == "-" else 1.0
            k += 1
        if k >= len(tokens):
            raise ModelError(f"dangling sign in {where}")
        tok = tokens[k]
        if _is_number(tok):
            val = sign * float(tok)
            if k + 1 < len(tokens) and tokens[k + 1] not in "+-" and not _is_number(tokens[k + 1]):
                name = tokens[k + 1]
                coefs[name] = coefs.get(name, 0.0) + val
                k += 2
            else:
                const += val
                k += 1
        else:
            coefs[tok] = coefs.get(tok, 0.0) + sign
            k += 1
    return coefs, const


def read_lp(src) -> LinearProgram:
    """Parse the format produced by :func:`write_lp`."""
    if isinstance(src, (str, Path)) and Path(src).exists():
        text = Path(src).read_text(encoding="utf-8")
    elif isinstance(src, str):
        text = src
    else:
        text = src.read()
    name = "lp"
    section = None
    obj_tokens: list[str] = []
    rows: list[tuple[str, list[str]]] = []
    bounds: list[list[str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            if lineno == 1:
                name = line[1:].strip() or name
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            continue
        if section == "obj":
            if ":" in line:
                line = line.split(":", 1)[1]
            obj_tokens.extend(line.split())
        elif section == "rows":
            if ":" not in line:
                raise ModelError(f"line {lineno}: row without a name")
            rname, body = line.split(":", 1)
            rows.append((rname.strip(), body.split()))
        elif section == "bounds":
            bounds.append(line.split())
        else:
            raise ModelError(f"line {lineno}: text outside a section")

    order: list[str] = []
    lo: dict[str, float] = {}
    hi: dict[str, float] = {}
    for toks in bounds:
        if len(toks) == 2 and toks[1].lower() == "free":
            v, a, b = toks[0], -INF, INF
        elif len(toks) == 3 and toks[1] == "=":
            v, a, b = toks[0], float(toks[2]), float(toks[2])
        elif len(toks) == 3 and toks[1] == ">=":
            v, a, b = toks[0], float(toks[2]), INF
        elif len(toks) == 3 and toks[1] == "<=":
            v, a, b = toks[0], 0.0, float(toks[2])
        elif len(toks) == 5 and toks[1] == toks[3] == "<=":
            v, a, b = toks[2], float(toks[0]), float(toks[4])
        else:
            raise ModelError(f"cannot parse bound {' '.join(toks)!r}")
        if v not in lo:
            order.append(v)
        lo[v], hi[v] = a, b

    obj, obj_const = _parse_expr(obj_tokens, "objective")
    parsed_rows = []
    for rname, toks in rows:
        idx = next((k for k, t in enumerate(toks) if t in (LE, GE, EQ)), None)
        if idx is None or idx != len(toks) - 2:
            raise ModelError(f"row {rname!r}: expected '<expr> <sense> <rhs>'")
        coefs, const = _parse_expr(toks[:idx], rname)
        parsed_rows.append((rname, coefs, toks[idx], float(toks[idx + 1]) - const))
        for v in coefs:
            if v not in lo:
                order.append(v)
                lo[v], hi[v] = 0.0, INF
    for v in obj:
        if v not in lo:
            order.append(v)
            lo[v], hi[v] = 0.0, INF

    lp = LinearProgram(name=name, obj_constant=obj_const)
    col = {v: k for k, v in enumerate(order)}
    for v in order:
        lp.add_variable(lo[v], hi[v], obj.get(v, 0.0), name=v)
    for rname, coefs, sense, rhs in parsed_rows:
        cols = np.array([col[v] for v in coefs], dtype=np.int64)
        vals = np.array(list(coefs.values()), dtype=float)
        lp.add_constraints(1, np.zeros(cols.size, dtype=np.int64), cols, vals, sense, rhs, name=rname)
    return lp


def loads(text: str) -> LinearProgram:
    return read_lp(io.StringIO(text))
