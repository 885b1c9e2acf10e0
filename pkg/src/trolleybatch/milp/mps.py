"""Free-format MPS emission."""

from __future__ import annotations

import math
import re
from collections import defaultdict

from ..errors import MpsNameError
from .model import BINARY, CONTINUOUS, MilpModel

OBJ_ROW = "obj"
_BAD = re.compile(r"[^A-Za-z0-9_.\-]")

_ROW_TYPE = {"<=": "L", "=": "E", ">=": "G"}


def sanitize(name: str) -> str:
    """MPS-safe token: no whitespace, no quotes, no leading '$' or '*'."""
    out = _BAD.sub("_", name)
    if not out or out[0] in "$*":
        out = "_" + out
    return out


def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".17g")


def _check_names(names, what):
    seen = defaultdict(list)
    for n in names:
        seen[sanitize(n)].append(n)
    clashes = {k: v for k, v in seen.items() if len(v) > 1}
    if clashes:
        listing = "; ".join(f"{k} <- {v}" for k, v in sorted(clashes.items()))
        raise MpsNameError(f"{what} names collide after sanitization: {listing}")


def write_mps(model: MilpModel) -> str:
    """Render ``model`` as free MPS in declaration order.

    The NAME card carries the ``FREE`` keyword that COIN-OR readers need to
    switch to whitespace-separated parsing; other readers treat it as part
    of the name.
    """
    _check_names(model.variables, "variable")
    _check_names([OBJ_ROW] + [c.name for c in model.constraints], "row")

    lines = [f"NAME {sanitize(model.name)} FREE", "ROWS", f" N {OBJ_ROW}"]
    for c in model.constraints:
        lines.append(f" {_ROW_TYPE[c.sense]} {sanitize(c.name)}")

    column_entries = defaultdict(list)
    for v, coef in model.objective.items():
        column_entries[v].append((OBJ_ROW, coef))
    for c in model.constraints:
        row = sanitize(c.name)
        for v, coef in c.coeffs.items():
            column_entries[v].append((row, coef))

    lines.append("COLUMNS")
    in_marker = False
    marker_id = 0
    for var in model.variables.values():
        if var.is_integer and not in_marker:
            lines.append(f" M{marker_id} 'MARKER' 'INTORG'")
            in_marker = True
        elif not var.is_integer and in_marker:
            lines.append(f" M{marker_id} 'MARKER' 'INTEND'")
            marker_id += 1
            in_marker = False
        col = sanitize(var.name)
        entries = column_entries.get(var.name) or [(OBJ_ROW, 0.0)]
        for row, coef in entries:
            lines.append(f" {col} {row} {_num(coef)}")
    if in_marker:
        lines.append(f" M{marker_id} 'MARKER' 'INTEND'")

    lines.append("RHS")
    for c in model.constraints:
        if c.rhs != 0.0:
            lines.append(f" RHS {sanitize(c.name)} {_num(c.rhs)}")

    bounds = []
    for var in model.variables.values():
        col = sanitize(var.name)
        lo, up = var.lower, var.upper
        # BV resets bounds to [0, 1], so tightened binaries take the generic path
        if var.category == BINARY and (lo, up) == (0.0, 1.0):
            bounds.append(f" BV BND {col}")
            continue
        if lo == up:
            bounds.append(f" FX BND {col} {_num(lo)}")
            continue
        if math.isinf(lo) and math.isinf(up):
            bounds.append(f" FR BND {col}")
            continue
        if math.isinf(lo):
            bounds.append(f" MI BND {col}")
        elif lo != 0.0 or up < 0.0 or var.category != CONTINUOUS:
            bounds.append(f" LO BND {col} {_num(lo)}")
        if math.isinf(up):
            if var.category != CONTINUOUS:
                bounds.append(f" PL BND {col}")
        else:
            bounds.append(f" UP BND {col} {_num(up)}")
    if bounds:
        lines.append("BOUNDS")
        lines.extend(bounds)
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"
