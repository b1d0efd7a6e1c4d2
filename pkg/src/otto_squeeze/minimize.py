"""Bracketing and golden-section search for unimodal scalar functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

INVPHI = (math.sqrt(5) - 1) / 2
GROW = 1 + INVPHI  # golden ratio


class BracketFailure(RuntimeError):
    pass


@dataclass
class LineMin:
    x: float
    fx: float
    at_edge: bool = False
    evaluations: int = 0


def bracket_minimum(f, x0: float, step: float, limit: float):
    """Find ``a < b < c`` (in some order) with ``f(b) <= f(a), f(c)``.

    Searches downhill from ``x0`` with geometrically growing steps; stops at
    ``|x| <= limit``.  Returns ``(a, b, c, fa, fb, fc, hit_limit)``.
    """
    fa = f(x0)
    fp, fm = f(x0 + step), f(x0 - step)
    if fp >= fa and fm >= fa:
        return x0 - step, x0, x0 + step, fm, fa, fp, False
    if fm < fp:
        step = -step
        fb = fm
    else:
        fb = fp
    a, b = x0, x0 + step
    while True:
        c = b + GROW * (b - a)
        if abs(c) > limit:
            c = math.copysign(limit, c)
            fc = f(c)
            return a, b, c, fa, fb, fc, fc < fb
        fc = f(c)
        if fc >= fb:
            return a, b, c, fa, fb, fc, False
        a, fa, b, fb = b, fb, c, fc


def golden_section(f, a: float, c: float, tol: float, b: float | None = None, fb: float | None = None) -> LineMin:
    """Minimise a unimodal ``f`` on ``[a, c]`` to interval width ``tol``."""
    lo, hi = min(a, c), max(a, c)
    x1 = hi - INVPHI * (hi - lo)
    x2 = lo + INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    n = 2
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INVPHI * (hi - lo)
            f2 = f(x2)
        n += 1
    x, fx = (x1, f1) if f1 <= f2 else (x2, f2)
    if b is not None and fb is not None and fb < fx:
        x, fx = b, fb
    return LineMin(x, fx, evaluations=n)


def minimize_scalar(f, x0: float, step: float, limit: float, tol: float) -> LineMin:
    """Bracket then golden-section; flags minima pinned at ``|x| = limit``."""
    a, b, c, fa, fb, fc, at_edge = bracket_minimum(f, x0, step, limit)
    if not all(math.isfinite(v) for v in (fa, fb, fc)):
        raise BracketFailure("objective is not finite on the bracket")
    if at_edge:
        return LineMin(c, fc, at_edge=True)
    res = golden_section(f, a, c, tol, b, fb)
    return res
