"""Bracketed scalar root finding: bisection plus a safeguarded secant polish."""
from __future__ import annotations

from .errors import NumericalError


def solve_bracketed(f, lo: float, hi: float, *, rtol: float = 1e-12,
                    atol: float = 0.0, max_iter: int = 200) -> float:
    """Root of f in [lo, hi]; f(lo) and f(hi) must have opposite signs.

    Bisection narrows the bracket; once it is small, secant steps accelerate
    but are rejected whenever they leave the current bracket.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NumericalError("root bracket invalid: same sign at both ends")

    a, b, fa, fb = lo, hi, flo, fhi
    for _ in range(max_iter):
        width = b - a
        if width <= rtol * max(abs(a), abs(b)) + atol:
            break
        # secant candidate from the bracket endpoints
        m = 0.5 * (a + b)
        if fb != fa:
            s = b - fb * (b - a) / (fb - fa)
            if not (a < s < b):
                s = m
        else:
            s = m
        fs = f(s)
        if fs == 0.0:
            return s
        if (fs > 0) == (fa > 0):
            a, fa = s, fs
        else:
            b, fb = s, fs
        # guarantee progress: bisect whenever the secant stalls on one side
        if (b - a) > 0.5 * width:
            fm = f(m := 0.5 * (a + b))
            if fm == 0.0:
                return m
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b, fb = m, fm
    return 0.5 * (a + b)


def grow_bracket_up(f, lo: float, hi: float, *, factor: float = 2.0,
                    max_grow: int = 60):
    """Increase ``hi`` geometrically until f changes sign on [lo, hi]."""
    flo = f(lo)
    for _ in range(max_grow):
        fhi = f(hi)
        if (flo > 0) != (fhi > 0) or fhi == 0.0:
            return lo, hi
        hi *= factor
    raise NumericalError("failed to bracket root while growing interval")
