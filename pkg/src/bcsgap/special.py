"""Overflow-safe elementary factors used by the integrands."""
from __future__ import annotations

import numpy as np


def sech(y):
    """1/cosh(y), safe for |y| up to the exp underflow range."""
    a = np.abs(y)
    e = np.exp(-a)
    return 2.0 * e / (1.0 + e * e)


def sech2(y):
    s = sech(y)
    return s * s


def fermi(y):
    """1/(1 + e^y) without overflow for large |y|."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    pos = y >= 0
    e = np.exp(-y[pos])
    out[pos] = e / (1.0 + e)
    out[~pos] = 1.0 / (1.0 + np.exp(y[~pos]))
    return out
