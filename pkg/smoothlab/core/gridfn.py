"""
Sampled functions on boxes in R^n and the rearrangement calculus.

GridFunction samples at cell midpoints; outside the box a function is zero. rearrange() sorts
cell values into an exact step profile, and the f**, f** - f* operators act on an exact
piecewise representation (pieces a + b log t + c/t + d t^e), so no quadrature error enters
before a norm is taken.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from smoothlab.core.quadrature import log_panels, panel_sums, quad_log
from smoothlab.shared.errors import DomainError, InputError

MAX_DIM = 3


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridFunction:
    """Samples of f on a uniform midpoint grid over `box`; row-major `values` of shape `counts`."""

    dim: int
    box: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise InputError(f"dim must be 1, 2 or 3, got {self.dim}")
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        counts = tuple(int(c) for c in self.counts)
        if len(box) != self.dim or len(counts) != self.dim:
            raise InputError("box and counts must have one entry per axis")
        for lo, hi in box:
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise InputError(f"invalid axis bounds ({lo}, {hi})")
        if any(c < 2 for c in counts):
            raise InputError("counts per axis must be >= 2")
        vals = np.asarray(self.values, dtype=float)
        if vals.size != int(np.prod(counts)):
            raise InputError(f"expected {int(np.prod(counts))} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise InputError("grid values must be finite")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "values", _readonly(vals.reshape(counts)))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / c for (lo, hi), c in zip(self.box, self.counts))

    @property
    def cell_measure(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    def midpoints(self, axis: int) -> np.ndarray:
        lo, _ = self.box[axis]
        h = self.spacing[axis]
        return lo + (np.arange(self.counts[axis]) + 0.5) * h

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(self.midpoints(i) for i in range(self.dim)), indexing="ij"))

    @classmethod
    def from_callable(cls, fn: Callable[..., Any], box: Sequence[Sequence[float]],
                      counts: Sequence[int]) -> "GridFunction":
        """Sample fn(x1, ..., xn) (vectorized over meshgrid arrays) at the cell midpoints."""
        box_t = tuple((float(lo), float(hi)) for lo, hi in box)
        counts_t = tuple(int(c) for c in counts)
        probe = cls(len(box_t), box_t, counts_t, np.zeros(counts_t))
        vals = np.broadcast_to(np.asarray(fn(*probe.mesh()), dtype=float), counts_t)
        return cls(len(box_t), box_t, counts_t, vals)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.dim, self.box, self.counts, np.asarray(values, dtype=float).reshape(self.counts))

    def scaled(self, c: float) -> "GridFunction":
        return self.with_values(c * self.values)

    def abs_max(self) -> float:
        return float(np.max(np.abs(self.values)))

    def distribution(self, lam: float) -> float:
        """λ_n{x : |f(x)| > lam} as an exact sum of cell measures."""
        return np.count_nonzero(np.abs(self.values) > lam) * self.cell_measure

    def lp_sum(self, p: float) -> float:
        return float(np.sum(np.abs(self.values) ** p) * self.cell_measure)

    # serialization

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"dim,{self.dim}\n")
        buf.write("box," + ",".join(repr(x) for pair in self.box for x in pair) + "\n")
        buf.write("counts," + ",".join(str(c) for c in self.counts) + "\n")
        for v in self.values.ravel():
            buf.write(repr(float(v)) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        lines = text.splitlines()
        if len(lines) < 3:
            raise InputError("missing 3-line header (dim, box, counts)", line=len(lines) + 1)
        header = {}
        for lineno, (raw, key) in enumerate(zip(lines[:3], ("dim", "box", "counts")), start=1):
            parts = [p.strip() for p in raw.split(",")]
            if parts[0] != key:
                raise InputError(f"expected '{key},...' header", line=lineno)
            try:
                header[key] = [float(p) for p in parts[1:]] if key == "box" else [int(p) for p in parts[1:]]
            except ValueError as e:
                raise InputError(f"bad {key} header: {e}", line=lineno) from e
        if len(header["dim"]) != 1:
            raise InputError("dim header takes one value", line=1)
        dim = header["dim"][0]
        if dim not in (1, 2, 3):
            raise InputError(f"dim must be 1, 2 or 3, got {dim}", line=1)
        if len(header["box"]) != 2 * dim:
            raise InputError(f"box header needs {2 * dim} values", line=2)
        if len(header["counts"]) != dim:
            raise InputError(f"counts header needs {dim} values", line=3)
        vals: list[float] = []
        for lineno, raw in enumerate(lines[3:], start=4):
            s = raw.strip()
            if not s:
                continue
            for part in s.split(","):
                try:
                    v = float(part)
                except ValueError as e:
                    raise InputError(f"not a number: {part!r}", line=lineno) from e
                if not np.isfinite(v):
                    raise InputError("non-finite value", line=lineno)
                vals.append(v)
        box = [(header["box"][2 * i], header["box"][2 * i + 1]) for i in range(dim)]
        expected = int(np.prod(header["counts"]))
        if len(vals) != expected:
            raise InputError(f"expected {expected} values, got {len(vals)}", line=len(lines))
        return cls(dim, tuple(box), tuple(header["counts"]), np.array(vals))

    def save(self, path: str | Path) -> None:
        """Write .npz (binary) or CSV (any other suffix)."""
        p = Path(path)
        if p.suffix == ".npz":
            np.savez(p, dim=self.dim, box=np.array(self.box), counts=np.array(self.counts), values=self.values)
        else:
            from smoothlab.shared.files import atomic_write_text
            atomic_write_text(p, self.to_csv())

    @classmethod
    def load(cls, path: str | Path) -> "GridFunction":
        p = Path(path)
        if not p.is_file():
            raise InputError(f"no such file: {p}")
        if p.suffix == ".npz":
            with np.load(p) as z:
                return cls(int(z["dim"]), tuple(map(tuple, z["box"])), tuple(z["counts"]), z["values"])
        return cls.from_csv(p.read_text(encoding="utf-8"))


def shift_values(values: np.ndarray, steps: Sequence[int]) -> np.ndarray:
    """out[i] = values[i + steps] inside the array, 0 where i + steps leaves it (zero extension)."""
    out = np.zeros_like(values)
    src, dst = [], []
    for n, s in zip(values.shape, steps):
        s = int(s)
        if abs(s) >= n:
            return out
        if s >= 0:
            src.append(slice(s, n))
            dst.append(slice(0, n - s))
        else:
            src.append(slice(0, n + s))
            dst.append(slice(-s, n))
    out[tuple(dst)] = values[tuple(src)]
    return out


# ---------------------------------------------------------------------------
# profiles


class Interpolation(str, enum.Enum):
    STEP = "step"
    LOGLINEAR = "loglinear"


@dataclass(frozen=True)
class DecreasingProfile:
    """
    Non-negative non-increasing function on (0, inf) given by breakpoints (t_i, v_i).

    STEP: right-continuous, v_i on [t_i, t_{i+1}). LOGLINEAR: linear in log t between
    breakpoints (needs t_1 > 0). Before t_1 the value is v_1 (or v_1 (s/t_1)^head_exponent),
    after t_m it is v_m (or v_m (s/t_m)^tail_exponent).
    """

    t: np.ndarray
    v: np.ndarray
    interpolation: Interpolation = Interpolation.STEP
    head_exponent: Optional[float] = None
    tail_exponent: Optional[float] = None

    def __post_init__(self) -> None:
        t = np.atleast_1d(np.asarray(self.t, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if t.shape != v.shape or t.ndim != 1 or t.size == 0:
            raise InputError("profile needs matching 1-d breakpoint arrays")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise InputError("profile breakpoints must be finite")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise InputError("profile abscissae must be >= 0 and strictly increasing")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise InputError("profile values must be >= 0 and non-increasing")
        interp = Interpolation(self.interpolation)
        if interp is Interpolation.LOGLINEAR and t[0] <= 0:
            raise InputError("loglinear profiles need t_1 > 0")
        if self.tail_exponent is not None and self.tail_exponent > 0:
            raise InputError("tail exponent must be <= 0 for a non-increasing profile")
        if self.head_exponent is not None and self.head_exponent > 0:
            raise InputError("head exponent must be <= 0 for a non-increasing profile")
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "v", _readonly(v))
        object.__setattr__(self, "interpolation", interp)

    def __call__(self, s) -> np.ndarray:
        return eval_profile(self, s)

    @property
    def is_step(self) -> bool:
        return self.interpolation is Interpolation.STEP

    def distribution(self, lam: float) -> float:
        """measure{s : g(s) > lam} for step profiles."""
        if not self.is_step:
            raise DomainError("distribution is exact only for step profiles")
        above = self.v > lam
        if not np.any(above):
            return 0.0
        if above[-1]:
            return float("inf")
        return float(self.t[np.argmin(above)])

    def to_piecewise(self) -> "PiecewiseProfile":
        t, v = self.t, self.v
        m = t.size
        knots, a, b, d, e = [], [], [], [], []
        if t[0] > 0:
            knots.append(0.0)
            if self.head_exponent is not None:
                a.append(0.0)
                b.append(0.0)
                d.append(v[0] * t[0] ** (-self.head_exponent))
                e.append(self.head_exponent)
            else:
                a.append(v[0])
                b.append(0.0)
                d.append(0.0)
                e.append(0.0)
        for i in range(m - 1):
            knots.append(t[i])
            if self.is_step:
                a.append(v[i])
                b.append(0.0)
            else:
                slope = (v[i + 1] - v[i]) / np.log(t[i + 1] / t[i])
                a.append(v[i] - slope * np.log(t[i]))
                b.append(slope)
            d.append(0.0)
            e.append(0.0)
        knots.append(t[-1])
        if self.tail_exponent is not None and self.tail_exponent != 0:
            a.append(0.0)
            b.append(0.0)
            d.append(v[-1] * t[-1] ** (-self.tail_exponent))
            e.append(self.tail_exponent)
        else:
            a.append(v[-1])
            b.append(0.0)
            d.append(0.0)
            e.append(0.0)
        zeros = np.zeros(len(knots))
        return PiecewiseProfile(np.array(knots), np.array(a), np.array(b), zeros, np.array(d), np.array(e))

    def to_csv(self) -> str:
        return _two_column_csv(self.t, self.v)

    @classmethod
    def from_csv(cls, text: str, interpolation: Interpolation | str = Interpolation.STEP) -> "DecreasingProfile":
        t, v = read_two_column_csv(text)
        return cls(t, v, Interpolation(interpolation))


def eval_profile(g: DecreasingProfile, s) -> np.ndarray | float:
    """Value of g at s > 0 per its interpolation mode, with constant (or power) end extension."""
    arr = np.asarray(s, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("profiles are evaluated at t > 0 only", quantity="t")
    t, v = g.t, g.v
    out = np.empty(arr.shape)
    flat = arr.ravel()
    res = out.ravel()
    if g.is_step:
        idx = np.searchsorted(t, flat, side="right") - 1
        res[:] = v[np.clip(idx, 0, None)]
    else:
        logt = np.log(t)
        res[:] = np.interp(np.log(flat), logt, v)
    before = flat < t[0]
    if g.head_exponent is not None and np.any(before):
        res[before] = v[0] * (flat[before] / t[0]) ** g.head_exponent
    after = flat > t[-1]
    if g.tail_exponent is not None and np.any(after):
        res[after] = v[-1] * (flat[after] / t[-1]) ** g.tail_exponent
    out = res.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def rearrange(f: GridFunction) -> DecreasingProfile:
    """Non-increasing rearrangement f* as an exact step profile (runs of equal values merged)."""
    vals = np.sort(np.abs(f.values).ravel())[::-1]
    if not np.all(np.isfinite(vals)):
        raise InputError("grid values must be finite")
    starts = np.concatenate(([0], np.flatnonzero(np.diff(vals)) + 1))
    knots = starts * f.cell_measure
    heights = vals[starts]
    if heights[-1] > 0:
        knots = np.append(knots, vals.size * f.cell_measure)
        heights = np.append(heights, 0.0)
    return DecreasingProfile(knots, heights, Interpolation.STEP)


def profile_from_samples(values: np.ndarray, measures: np.ndarray) -> DecreasingProfile:
    """Rearrangement of a simple function given as (value, measure) pairs."""
    vals = np.abs(np.asarray(values, dtype=float).ravel())
    meas = np.asarray(measures, dtype=float).ravel()
    keep = meas > 0
    vals, meas = vals[keep], meas[keep]
    if vals.size == 0:
        return DecreasingProfile([0.0], [0.0])
    order = np.argsort(-vals, kind="stable")
    vals, meas = vals[order], meas[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(vals)) + 1))
    cum = np.concatenate(([0.0], np.cumsum(meas)))
    knots = cum[starts]
    heights = vals[starts]
    if heights[-1] > 0:
        knots = np.append(knots, cum[-1])
        heights = np.append(heights, 0.0)
    return DecreasingProfile(knots, heights, Interpolation.STEP)


def _two_column_csv(t: np.ndarray, v: np.ndarray, header: tuple[str, str] = ("t", "v")) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for a, b in zip(t, v):
        w.writerow((repr(float(a)), repr(float(b))))
    return buf.getvalue()


def read_two_column_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    t, v = [], []
    for lineno, row in enumerate(rows, start=1):
        if not row or not "".join(row).strip():
            continue
        if lineno == 1 and not _is_number(row[0]):
            continue
        if len(row) < 2:
            raise InputError("expected two columns", line=lineno)
        try:
            t.append(float(row[0]))
            v.append(float(row[1]))
        except ValueError as e:
            raise InputError(f"not a number: {e}", line=lineno) from e
    if not t:
        raise InputError("no data rows", line=len(rows) + 1)
    return np.array(t), np.array(v)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# exact piecewise representation


@dataclass(frozen=True)
class PiecewiseProfile:
    """
    g(t) = a_i + b_i log t + c_i / t + d_i t^{e_i} on [knots_i, knots_{i+1}); the last piece
    runs to infinity and knots_0 = 0.
    """

    knots: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray

    def __post_init__(self) -> None:
        arrs = [np.atleast_1d(np.asarray(x, dtype=float)) for x in (self.knots, self.a, self.b, self.c, self.d, self.e)]
        m = arrs[0].size
        if any(x.shape != (m,) for x in arrs):
            raise InputError("piecewise profile arrays must share one length")
        if arrs[0][0] != 0 or np.any(np.diff(arrs[0]) <= 0):
            raise InputError("knots must start at 0 and increase strictly")
        for name, x in zip(("knots", "a", "b", "c", "d", "e"), arrs):
            object.__setattr__(self, name, _readonly(x))

    @property
    def pieces(self) -> int:
        return self.knots.size

    @property
    def upper(self) -> np.ndarray:
        return np.append(self.knots[1:], np.inf)

    @property
    def is_step(self) -> bool:
        return not (np.any(self.b) or np.any(self.c) or np.any(self.d))

    def _eval(self, idx: np.ndarray, t: np.ndarray) -> np.ndarray:
        a, b, c, d, e = self.a[idx], self.b[idx], self.c[idx], self.d[idx], self.e[idx]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = a.copy()
            m = b != 0
            out[m] += b[m] * np.log(t[m])
            m = c != 0
            out[m] += c[m] / t[m]
            m = d != 0
            out[m] += d[m] * t[m] ** e[m]
        return out

    def __call__(self, t) -> np.ndarray | float:
        arr = np.asarray(t, dtype=float)
        if np.any(~(arr > 0)):
            raise DomainError("profiles are evaluated at t > 0 only", quantity="t")
        flat = arr.ravel()
        idx = np.searchsorted(self.knots, flat, side="right") - 1
        out = self._eval(idx, flat).reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    def eval_left(self, t) -> np.ndarray:
        """Left limits g(t-)."""
        flat = np.asarray(t, dtype=float).ravel()
        idx = np.clip(np.searchsorted(self.knots, flat, side="left") - 1, 0, None)
        return self._eval(idx, flat)

    def eval_piece(self, i: int | np.ndarray, t) -> np.ndarray:
        idx = np.broadcast_to(np.asarray(i), np.shape(t)).ravel()
        return self._eval(idx, np.asarray(t, dtype=float).ravel())

    def double_star(self) -> "PiecewiseProfile":
        """
        t ↦ (1/t)∫_0^t g, exact piece by piece.

        Pieces carrying a 1/t term (c != 0, or d t^e with e = -1 past the first knot) are rejected
        with DomainError: their average contains log(t)/t, which this basis cannot represent.
        Rearrangements and step profiles never produce such pieces.
        """
        if np.any(self.c):
            raise DomainError("averaging is implemented for pieces without a 1/t term", quantity="c")
        k, a, b, d, e = self.knots, self.a, self.b, self.d, self.e
        has_d = d != 0
        if has_d[0] and e[0] <= -1:
            raise DomainError("non-integrable head: exponent <= -1 near 0", quantity="head_exponent")
        if np.any(has_d[1:] & (e[1:] == -1)):
            raise DomainError("t^-1 pieces average to log(t)/t, outside the piecewise basis", quantity="e")
        ep1 = np.where(has_d, e + 1.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            klogk = np.where(k > 0, k * np.log(np.where(k > 0, k, 1.0)), 0.0)
            kpow = np.where(has_d & (k > 0), np.where(k > 0, k, 1.0) ** ep1, 0.0)

        def prim(tt: np.ndarray) -> np.ndarray:
            # ∫ of piece i evaluated as antiderivative F_i(tt) = a t + b (t log t - t) + d t^{e+1}/(e+1)
            with np.errstate(divide="ignore", invalid="ignore"):
                tl = np.where(tt > 0, tt * np.log(np.where(tt > 0, tt, 1.0)), 0.0)
                tp = np.where(has_d & (tt > 0), np.where(tt > 0, tt, 1.0) ** ep1, 0.0)
            return a * tt + b * (tl - tt) + np.where(has_d, d * tp / ep1, 0.0)

        f_lo = a * k + b * (klogk - k) + np.where(has_d, d * kpow / ep1, 0.0)
        upper = self.upper
        finite_up = np.where(np.isfinite(upper), upper, 0.0)
        full = prim(finite_up) - f_lo
        full[-1] = 0.0
        integral_at_knot = np.concatenate(([0.0], np.cumsum(full)[:-1]))
        new_a = a - b
        new_b = b.copy()
        new_c = integral_at_knot - f_lo
        new_d = np.where(has_d, d / ep1, 0.0)
        return PiecewiseProfile(k, new_a, new_b, new_c, new_d, e.copy())

    def oscillation(self) -> "PiecewiseProfile":
        """g** - g, exact."""
        ds = self.double_star()
        return PiecewiseProfile(self.knots, ds.a - self.a, ds.b - self.b, ds.c, ds.d - self.d, self.e.copy())

    def scaled(self, factor: float) -> "PiecewiseProfile":
        return PiecewiseProfile(self.knots, factor * self.a, factor * self.b, factor * self.c, factor * self.d, self.e)

    def sample_points(self, per_piece: int = 3, window: float = 16.0) -> np.ndarray:
        """Knots plus interior log-spaced points; the unbounded ends reach e^{±window} around the knots."""
        pts = [self.knots[1:]]
        up = self.upper
        lo = np.where(self.knots > 0, self.knots, self.knots[1] * np.exp(-window) if self.pieces > 1 else np.exp(-window))
        hi = np.where(np.isfinite(up), up, (self.knots[-1] if self.knots[-1] > 0 else 1.0) * np.exp(window))
        frac = np.linspace(0.0, 1.0, per_piece + 2)[1:-1]
        pts.append((lo[:, None] * (hi / lo)[:, None] ** frac[None, :]).ravel())
        pts.append(lo[:1])
        pts.append(hi[-1:])
        p = np.unique(np.concatenate(pts))
        return p[p > 0]

    def to_csv(self, per_piece: int = 0) -> str:
        pts = self.knots[1:] if per_piece == 0 or self.is_step else self.sample_points(per_piece)
        if pts.size == 0:
            pts = np.array([1.0])
        return _two_column_csv(pts, np.asarray(self(pts)))

    # asymptotic power of |g| at an end of a piece: (exponent, log exponent)

    def leading_power(self, i: int, end: str) -> tuple[float, float]:
        a, b, c, d, e = self.a[i], self.b[i], self.c[i], self.d[i], self.e[i]
        cands: list[tuple[float, float]] = []
        if a:
            cands.append((0.0, 0.0))
        if b:
            cands.append((0.0, 1.0))
        if c:
            cands.append((-1.0, 0.0))
        if d:
            cands.append((float(e), 0.0))
        if not cands:
            return (np.inf, 0.0) if end == "zero" else (-np.inf, 0.0)
        return min(cands) if end == "zero" else max(cands)


def _integrable(power: float, logpow: float, end: str) -> bool:
    if end == "zero":
        return power > -1 or (power == -1 and logpow < -1)
    return power < -1 or (power == -1 and logpow < -1)


def split_intervals(lo: np.ndarray, hi: np.ndarray, cuts: Sequence[float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split each [lo_i, hi_i] at interior cut points; returns (lo', hi', owner)."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    owner = np.arange(lo.size)
    for c in sorted(cuts):
        inside = (lo < c) & (hi > c)
        if not np.any(inside):
            continue
        idx = np.flatnonzero(inside)
        lo = np.concatenate((lo, np.full(idx.size, c)))
        hi = np.concatenate((hi, hi[idx]))
        owner = np.concatenate((owner, owner[idx]))
        hi[idx] = c
    return lo, hi, owner


def profile_integral(g: PiecewiseProfile, r: float, weight: Any = None) -> float:
    """
    ∫_0^∞ |g(t)|^r w(t) dt, +inf when divergent. `weight` follows the weight protocol of
    smoothlab.core.weights (callable, integral(lo, hi), end_behaviour(end), breakpoints); None is dt.
    Step profiles use exact primitives of w; other pieces use Gauss-Legendre in log t.
    """
    if not (np.isfinite(r) and r > 0):
        raise DomainError("profile_integral needs finite r > 0; use profile_sup for r = inf")
    lo, hi = g.knots, g.upper
    if g.is_step:
        mass = np.abs(g.a) ** r
        live = mass > 0
        if not np.any(live):
            return 0.0
        if weight is None:
            pieces = np.where(live, hi - lo, 0.0)
        else:
            pieces = np.zeros(lo.size)
            pieces[live] = weight.integral(lo[live], hi[live])
        with np.errstate(invalid="ignore"):
            total = float(np.sum(np.where(live, mass * pieces, 0.0)))
        return total
    total = 0.0
    wa0, wl0 = (0.0, 0.0) if weight is None else weight.end_behaviour("zero")
    wai, wli = (0.0, 0.0) if weight is None else weight.end_behaviour("inf")
    m = g.pieces
    fin = [i for i in range(m) if lo[i] > 0 and np.isfinite(hi[i])]
    if fin:
        idx = np.array(fin)
        cuts = () if weight is None else weight.breakpoints
        slo, shi, owner = split_intervals(lo[idx], hi[idx], cuts)
        t, w, own = log_panels(slo, shi)
        piece_of = idx[owner][own]
        vals = np.abs(g.eval_piece(piece_of, t)) ** r
        if weight is not None:
            vals = vals * weight(t)
        total += float(np.sum(vals * w))
    for i in range(m):
        if lo[i] > 0 and np.isfinite(hi[i]):
            continue
        if not (g.a[i] or g.b[i] or g.c[i] or g.d[i]):
            continue
        if lo[i] == 0:
            p, lp = g.leading_power(i, "zero")
            if not _integrable(r * p + wa0, r * lp + wl0, "zero"):
                return float("inf")
        if not np.isfinite(hi[i]):
            p, lp = g.leading_power(i, "inf")
            if not _integrable(r * p + wai, r * lp + wli, "inf"):
                return float("inf")

        def integrand(s: float, i: int = i) -> float:
            val = abs(float(g.eval_piece(i, np.array([s]))[0])) ** r
            return val * (1.0 if weight is None else float(weight(np.array([s]))[0]))

        cuts = () if weight is None else weight.breakpoints
        total += quad_log(integrand, float(lo[i]), float(hi[i]), breakpoints=cuts)
    return total


def profile_sup(g: PiecewiseProfile, factor: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                factor_powers: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0)),
                window: float = 16.0) -> float:
    """
    sup_t |g(t)| factor(t). Evaluated at breakpoint values, left limits and interior samples;
    divergence at 0 or infinity is decided from the leading powers.
    `factor_powers` = ((power, logpow) at 0, (power, logpow) at inf) of the factor.
    """
    (f0, l0), (fi, li) = factor_powers
    if g.a[0] or g.b[0] or g.c[0] or g.d[0]:
        p, lp = g.leading_power(0, "zero")
        tot, totl = p + f0, lp + l0
        if tot < 0 or (tot == 0 and totl > 0):
            return float("inf")
    last = g.pieces - 1
    if g.a[last] or g.b[last] or g.c[last] or g.d[last]:
        p, lp = g.leading_power(last, "inf")
        tot, totl = p + fi, lp + li
        if tot > 0 or (tot == 0 and totl > 0):
            return float("inf")
    pts = g.sample_points(per_piece=6, window=window)
    vals = np.abs(np.asarray(g(pts)))
    left = np.abs(g.eval_left(g.knots[1:])) if g.pieces > 1 else np.zeros(0)
    lpts = g.knots[1:]
    if factor is not None:
        vals = vals * factor(pts)
        if left.size:
            left = left * factor(lpts)
    best = float(np.max(vals)) if vals.size else 0.0
    if left.size:
        best = max(best, float(np.max(left)))
    return best


def profile_breakpoints(g: PiecewiseProfile) -> tuple[np.ndarray, np.ndarray]:
    """(knots, values at knots) for export."""
    k = g.knots[1:] if g.pieces > 1 else np.array([1.0])
    return k, np.asarray(g(k))


def double_star(g: DecreasingProfile) -> PiecewiseProfile:
    """g** = (1/t)∫_0^t g, exact on step and log-linear profiles."""
    return g.to_piecewise().double_star()


def oscillation(g: DecreasingProfile) -> PiecewiseProfile:
    """g** - g (non-negative; t (g** - g)(t) non-decreasing)."""
    return g.to_piecewise().oscillation()


def scaled_oscillation_is_monotone(g: DecreasingProfile, points: np.ndarray, slack: float = 1e-12) -> bool:
    """Audit that t ↦ t (g** - g)(t) is non-decreasing on `points`."""
    osc = oscillation(g)
    pts = np.sort(np.asarray(points, dtype=float))
    vals = pts * np.asarray(osc(pts))
    scale = max(1.0, float(np.max(np.abs(vals))))
    return bool(np.all(np.diff(vals) >= -slack * scale))
