"""
Quadrature on (0, inf): closed-form power integrals, composite Gauss-Legendre in x = log t,
and scipy quad fallbacks for unbounded pieces.

Config (env): SMOOTHLAB_GL_NODES (default 8) nodes per panel; panels are at most
MAX_PANEL_LOG_WIDTH wide in log t.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from smoothlab.shared.env_helpers import get_float_env, get_int_env

GL_NODES = get_int_env("SMOOTHLAB_GL_NODES", default=8)
MAX_PANEL_LOG_WIDTH = get_float_env("SMOOTHLAB_PANEL_LOG_WIDTH", default=0.5)
QUAD_EPSREL = 1e-11
QUAD_LIMIT = 400


@lru_cache(maxsize=8)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def log_grid(lo: float, hi: float, per_decade: int = 4) -> np.ndarray:
    """Geometric grid from lo to hi inclusive with `per_decade` points per decade."""
    if not (0 < lo < hi):
        raise ValueError("log_grid needs 0 < lo < hi")
    num = int(round(np.log10(hi / lo) * per_decade)) + 1
    return np.geomspace(lo, hi, max(num, 2))


def power_integral(lo, hi, beta) -> np.ndarray:
    """
    Vectorized ∫_lo^hi t^beta dt for 0 <= lo <= hi <= inf. Divergent pieces give +inf.
    Uses expm1/log1p on short pieces to avoid cancellation.
    """
    lo, hi, beta = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float), np.asarray(beta, float))
    out = np.zeros(lo.shape)
    e = beta + 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        nonempty = hi > lo
        at_zero = nonempty & (lo == 0)
        to_inf = nonempty & np.isinf(hi)
        out[at_zero & (e <= 0)] = np.inf
        out[to_inf & (e >= 0)] = np.inf
        ok = nonempty & ~(at_zero & (e <= 0)) & ~(to_inf & (e >= 0))
        # both ends at 0/inf with an admissible exponent cannot happen except lo=0,hi=inf (always divergent)
        both = ok & at_zero & to_inf
        out[both] = np.inf
        ok &= ~both
        z = ok & at_zero
        out[z] = hi[z] ** e[z] / e[z]
        i = ok & to_inf
        out[i] = -(lo[i] ** e[i]) / e[i]
        mid = ok & ~at_zero & ~to_inf
        lg = mid & (e == 0)
        out[lg] = np.log(hi[lg] / lo[lg])
        pw = mid & (e != 0)
        r = np.log1p((hi[pw] - lo[pw]) / lo[pw])
        out[pw] = lo[pw] ** e[pw] * np.expm1(e[pw] * r) / e[pw]
    return out


def log_panels(lo: np.ndarray, hi: np.ndarray, n: int | None = None,
               max_width: float | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Composite Gauss-Legendre rule in x = log t over many finite intervals [lo_i, hi_i], lo_i > 0.

    Returns (t, w, owner): nodes t, weights w such that Σ_j w_j g(t_j) over owner == i
    approximates ∫_{lo_i}^{hi_i} g(t) dt (the Jacobian t is folded into w).
    """
    n = n or GL_NODES
    max_width = max_width or MAX_PANEL_LOG_WIDTH
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    if np.any(lo <= 0) or np.any(~np.isfinite(hi)):
        raise ValueError("log_panels needs finite intervals with lo > 0")
    xl, xh = np.log(lo), np.log(hi)
    width = np.maximum(xh - xl, 0.0)
    counts = np.maximum(1, np.ceil(width / max_width).astype(int))
    owner = np.repeat(np.arange(lo.size), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    k = np.arange(owner.size) - np.repeat(starts, counts)
    h = (width / counts)[owner]
    a = xl[owner] + k * h
    gx, gw = gauss_legendre(n)
    x = a[:, None] + 0.5 * h[:, None] * (gx[None, :] + 1.0)
    t = np.exp(x)
    w = 0.5 * h[:, None] * gw[None, :] * t
    return t.ravel(), w.ravel(), np.repeat(owner, n)


def panel_sums(values: np.ndarray, weights: np.ndarray, owner: np.ndarray, size: int) -> np.ndarray:
    """Reduce node contributions back to their intervals."""
    return np.bincount(owner, weights=values * weights, minlength=size)


def quad_log(fn: Callable[[float], float], lo: float, hi: float, breakpoints=()) -> float:
    """
    ∫_lo^hi fn(t) dt via scipy quad in x = log t; lo may be 0 and hi may be inf.
    Finite breakpoints inside (lo, hi) split the range (kinks of slowly varying factors).
    """
    if not hi > lo:
        return 0.0
    xl = -np.inf if lo == 0 else float(np.log(lo))
    xh = np.inf if np.isinf(hi) else float(np.log(hi))
    cuts = sorted(float(np.log(b)) for b in breakpoints if lo < b < hi)
    edges = [xl, *cuts, xh]

    def integrand(x: float) -> float:
        t = np.exp(x)
        return float(fn(t)) * t

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, epsrel=QUAD_EPSREL, epsabs=0.0, limit=QUAD_LIMIT)
        total += val
    return total
