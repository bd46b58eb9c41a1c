"""
Weights on (0, inf): slowly varying log-power factors, power-SV weights w(t) = c t^α b(t)^ρ,
tabulated piecewise-power weights, the B_r / B_r* / B_∞* conditions, Hardy operators,
smooth regularizations of slowly varying factors and the associate-weight formulas.

Config (env): SMOOTHLAB_LOG_WINDOW (default 16) bounds x = log t for grid work;
SMOOTHLAB_MAX_REG_DEPTH (default 8) caps the regularization depth.
"""
from __future__ import annotations

import hashlib
import math
from functools import cached_property
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator
from scipy import interpolate, signal

from smoothlab.core.gridfn import DecreasingProfile, PiecewiseProfile, profile_integral, split_intervals
from smoothlab.core.quadrature import gauss_legendre, log_grid, log_panels, panel_sums, power_integral, quad_log
from smoothlab.observability.logging import get_logger
from smoothlab.shared.env_helpers import get_float_env, get_int_env
from smoothlab.shared.errors import DomainError, InputError, PreconditionError

logger = get_logger(__name__)

LOG_WINDOW = get_float_env("SMOOTHLAB_LOG_WINDOW", default=16.0)
MAX_REG_DEPTH = get_int_env("SMOOTHLAB_MAX_REG_DEPTH", default=8)
STABILITY_TOLERANCE = 0.05
REG_STEP = 1.0 / 32.0
REG_PAD = 24.0


def _as_inf(v: Any) -> Any:
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity", "∞"):
        return math.inf
    return v


class SVPiece(BaseModel):
    """b(t) = factor * (1 + log_scale |log t|)^gamma on [lo, hi)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lo: float = Field(..., ge=0, description="left end of the piece")
    hi: float = Field(..., description="right end; 'inf' allowed")
    gamma: float = Field(0.0, description="log exponent")
    log_scale: float = Field(1.0, gt=0, description="λ in (1 + λ|log t|)")
    factor: float = Field(1.0, gt=0, description="constant multiplier")

    @model_validator(mode="before")
    @classmethod
    def _interval(cls, data: Any) -> Any:
        if isinstance(data, dict) and "interval" in data:
            data = dict(data)
            lo, hi = data.pop("interval")
            data["lo"], data["hi"] = _as_inf(lo), _as_inf(hi)
        return data

    @field_validator("hi", mode="before")
    @classmethod
    def _hi(cls, v: Any) -> Any:
        return _as_inf(v)

    @field_serializer("hi")
    def _ser_hi(self, v: float) -> Any:
        return "inf" if math.isinf(v) else v


class SlowlyVarying(BaseModel):
    """Piecewise log-power slowly varying factor; pieces partition (0, inf)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pieces: tuple[SVPiece, ...]
    nondecreasing_class: bool = Field(False, description="asserted membership in SV↑")

    @model_validator(mode="after")
    def _check(self) -> "SlowlyVarying":
        ps = self.pieces
        if not ps:
            raise ValueError("at least one piece is required")
        if ps[0].lo != 0 or not math.isinf(ps[-1].hi):
            raise ValueError("pieces must start at 0 and end at inf")
        for a, b in zip(ps[:-1], ps[1:]):
            if a.hi != b.lo:
                raise ValueError("pieces must be contiguous")
        for p in ps:
            if not p.hi > p.lo:
                raise ValueError("empty piece")
        if self.nondecreasing_class and not self.in_sv_up():
            raise ValueError("factor is not in SV↑ (non-decreasing, b(0+) > 0, b(inf) = inf)")
        return self

    @classmethod
    def constant(cls, c: float = 1.0) -> "SlowlyVarying":
        return cls(pieces=(SVPiece(lo=0, hi=math.inf, factor=c),))

    @classmethod
    def log_power(cls, gamma: float, log_scale: float = 1.0) -> "SlowlyVarying":
        return cls(pieces=(SVPiece(lo=0, hi=math.inf, gamma=gamma, log_scale=log_scale),))

    @classmethod
    def two_piece(cls, gamma_high: float, gamma_low: float = 0.0) -> "SlowlyVarying":
        """(1+|log t|)^gamma_low on (0, 1), (1+|log t|)^gamma_high on [1, inf)."""
        pieces = (SVPiece(lo=0, hi=1, gamma=gamma_low), SVPiece(lo=1, hi=math.inf, gamma=gamma_high))
        sv = cls(pieces=pieces)
        if sv.in_sv_up():
            return cls(pieces=pieces, nondecreasing_class=True)
        return sv

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, ...]:
        ps = self.pieces
        return (
            np.array([p.lo for p in ps]),
            np.array([p.gamma for p in ps]),
            np.array([p.log_scale for p in ps]),
            np.array([p.factor for p in ps]),
        )

    def __call__(self, t) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        los, g, lam, fac = self._arrays
        idx = np.searchsorted(los, arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        return fac[idx] * (1.0 + lam[idx] * np.abs(np.log(arr))) ** g[idx]

    def power(self, rho: float, t) -> np.ndarray:
        return self(t) ** rho

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(p.lo for p in self.pieces[1:])

    @property
    def is_constant(self) -> bool:
        return all(p.gamma == 0 for p in self.pieces) and len({p.factor for p in self.pieces}) == 1

    def end_gamma(self, end: str) -> float:
        """Log exponent of b near 0 ('zero') or infinity ('inf')."""
        return self.pieces[0].gamma if end == "zero" else self.pieces[-1].gamma

    def in_sv_up(self) -> bool:
        """Closed-form SV↑ test for the log-power family."""
        for p in self.pieces:
            if p.lo < 1 and p.gamma > 0:
                return False
            if p.hi > 1 and p.gamma < 0:
                return False
        if self.pieces[0].gamma != 0:
            return False
        if self.pieces[-1].gamma <= 0:
            return False
        grid = log_grid(10.0 ** -6, 10.0 ** 6, 16)
        vals = self(grid)
        return bool(np.all(np.diff(vals) >= -1e-12 * vals[1:]))

    def jumps(self) -> list[float]:
        """log b(t+) - log b(t-) at each piece boundary."""
        out = []
        for a, b in zip(self.pieces[:-1], self.pieces[1:]):
            x = abs(math.log(b.lo))
            left = math.log(a.factor) + a.gamma * math.log1p(a.log_scale * x)
            right = math.log(b.factor) + b.gamma * math.log1p(b.log_scale * x)
            out.append(right - left)
        return out

    def literal(self) -> str:
        if self.is_constant:
            f = self.pieces[0].factor
            return "1" if f == 1 else repr(f)
        ps = self.pieces
        if len(ps) == 1 and ps[0].factor == 1 and ps[0].log_scale == 1:
            return f"log^{ps[0].gamma!r}"
        if (len(ps) == 2 and ps[0].hi == 1 and all(p.factor == 1 and p.log_scale == 1 for p in ps)):
            if ps[0].gamma == 0:
                return f"logplus^{ps[1].gamma!r}"
            return f"log({ps[0].gamma!r},{ps[1].gamma!r})"
        parts = [f"[{p.lo!r},{'inf' if math.isinf(p.hi) else repr(p.hi)}):{p.gamma!r}:{p.log_scale!r}:{p.factor!r}"
                 for p in ps]
        return "sv(" + ";".join(parts) + ")"


def smallest_monotone_epsilon(b: SlowlyVarying) -> float:
    """
    Smallest ε with t^ε b non-decreasing and t^{-ε} b non-increasing: max |γ|λ over pieces,
    or +inf when b jumps at a piece boundary.
    """
    if any(abs(j) > 1e-14 for j in b.jumps()):
        return math.inf
    return max(abs(p.gamma) * p.log_scale for p in b.pieces)


def sv_monotone_audit(b: SlowlyVarying, eps_values: Sequence[float] = (0.1, 0.01),
                      grid: Optional[np.ndarray] = None) -> dict[float, bool]:
    """Grid audit (heuristic) of t^{±ε} b monotonicity for each ε."""
    g = log_grid(10.0 ** -6, 10.0 ** 6, 32) if grid is None else np.asarray(grid)
    vals = b(g)
    out = {}
    for eps in eps_values:
        up = g ** eps * vals
        down = g ** (-eps) * vals
        ok = bool(np.all(np.diff(up) >= -1e-12 * up[1:]) and np.all(np.diff(down) <= 1e-12 * down[:-1]))
        out[float(eps)] = ok
    return out


# ---------------------------------------------------------------------------
# weights


class PowerSVWeight(BaseModel):
    """w(t) = scale * t^alpha * b(t)^power."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(..., description="power exponent α")
    sv: SlowlyVarying = Field(default_factory=SlowlyVarying.constant)
    power: float = Field(1.0, description="exponent ρ applied to b")
    scale: float = Field(1.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _sv_list(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("sv"), list):
            data = dict(data)
            data["sv"] = {"pieces": data["sv"]}
        return data

    @classmethod
    def pure(cls, alpha: float, scale: float = 1.0) -> "PowerSVWeight":
        return cls(alpha=alpha, scale=scale)

    @property
    def is_pure_power(self) -> bool:
        return self.power == 0 or self.sv.is_constant

    @property
    def effective_scale(self) -> float:
        """scale * b^ρ when b is constant."""
        return self.scale * self.sv.pieces[0].factor ** self.power

    def __call__(self, t) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        out = self.scale * arr ** self.alpha
        if self.power != 0 and not (self.sv.is_constant and self.sv.pieces[0].factor == 1):
            out = out * self.sv(arr) ** self.power
        return out

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return () if self.is_pure_power else self.sv.breakpoints

    def end_behaviour(self, end: str) -> tuple[float, float]:
        """(power, log power) of w near 0 or infinity."""
        lp = 0.0 if self.is_pure_power else self.sv.end_gamma(end) * self.power
        return self.alpha, lp

    def head_integrable(self, extra_power: float = 0.0) -> bool:
        a, lp = self.end_behaviour("zero")
        a += extra_power
        return a > -1 or (a == -1 and lp < -1)

    def tail_integrable(self, extra_power: float = 0.0) -> bool:
        a, lp = self.end_behaviour("inf")
        a += extra_power
        return a < -1 or (a == -1 and lp < -1)

    def integral(self, lo, hi, extra_power: float = 0.0) -> np.ndarray | float:
        """∫_lo^hi t^extra_power w(t) dt, vectorized; +inf when divergent."""
        scalar = np.ndim(lo) == 0 and np.ndim(hi) == 0
        lo_a, hi_a = np.broadcast_arrays(np.atleast_1d(np.asarray(lo, float)), np.atleast_1d(np.asarray(hi, float)))
        if self.is_pure_power:
            out = self.effective_scale * power_integral(lo_a, hi_a, self.alpha + extra_power)
            return float(out[0]) if scalar else out
        out = np.zeros(lo_a.shape)
        nonempty = hi_a > lo_a
        finite = nonempty & (lo_a > 0) & np.isfinite(hi_a)
        if np.any(finite):
            idx = np.flatnonzero(finite)
            slo, shi, owner = split_intervals(lo_a[idx], hi_a[idx], self.sv.breakpoints)
            t, w, own = log_panels(slo, shi)
            sub = panel_sums(t ** extra_power * self(t), w, own, slo.size)
            out[idx] = np.bincount(owner, weights=sub, minlength=idx.size)
        for i in np.flatnonzero(nonempty & ~finite):
            if lo_a[i] == 0 and not self.head_integrable(extra_power):
                out[i] = math.inf
                continue
            if math.isinf(hi_a[i]) and not self.tail_integrable(extra_power):
                out[i] = math.inf
                continue
            out[i] = quad_log(lambda s: s ** extra_power * float(self(s)), float(lo_a[i]), float(hi_a[i]),
                              breakpoints=self.sv.breakpoints)
        return float(out[0]) if scalar else out

    def cumulative(self, t) -> np.ndarray | float:
        return self.integral(np.zeros_like(np.asarray(t, float)), t)

    def literal(self) -> str:
        parts = []
        if self.scale != 1:
            parts.append(repr(self.scale))
        parts.append(f"t^{self.alpha!r}")
        if not (self.sv.is_constant and self.sv.pieces[0].factor == 1) and self.power != 0:
            s = self.sv.literal()
            parts.append(s if self.power == 1 else f"{s}**{self.power!r}")
        return "*".join(parts)


class TabulatedWeight(BaseModel):
    """
    Positive weight given on a log grid, interpolated as a power between nodes and extended by
    the end-segment powers. Integrals are exact for this piecewise-power shape.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    t: tuple[float, ...]
    values: tuple[float, ...]
    label: str = "tabulated"

    @model_validator(mode="after")
    def _check(self) -> "TabulatedWeight":
        t = np.asarray(self.t)
        v = np.asarray(self.values)
        if t.size < 2 or t.size != v.size:
            raise ValueError("need at least two matching nodes")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("nodes must be positive and increasing")
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("values must be finite and positive")
        return self

    @classmethod
    def from_arrays(cls, t: np.ndarray, values: np.ndarray, label: str = "tabulated") -> "TabulatedWeight":
        return cls(t=tuple(float(x) for x in t), values=tuple(float(x) for x in values), label=label)

    @cached_property
    def _grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        t = np.asarray(self.t)
        v = np.asarray(self.values)
        slopes = np.diff(np.log(v)) / np.diff(np.log(t))
        return t, v, slopes

    @property
    def head_exponent(self) -> float:
        return float(self._grid[2][0])

    @property
    def tail_exponent(self) -> float:
        return float(self._grid[2][-1])

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def __call__(self, s) -> np.ndarray:
        t, v, _ = self._grid
        x = np.log(np.asarray(s, dtype=float))
        lt, lv = np.log(t), np.log(v)
        out = np.interp(x, lt, lv)
        out = np.where(x < lt[0], lv[0] + self.head_exponent * (x - lt[0]), out)
        out = np.where(x > lt[-1], lv[-1] + self.tail_exponent * (x - lt[-1]), out)
        return np.exp(out)

    def end_behaviour(self, end: str) -> tuple[float, float]:
        return (self.head_exponent if end == "zero" else self.tail_exponent), 0.0

    def head_integrable(self, extra_power: float = 0.0) -> bool:
        return self.head_exponent + extra_power > -1

    def tail_integrable(self, extra_power: float = 0.0) -> bool:
        return self.tail_exponent + extra_power < -1

    def _primitive(self, x: np.ndarray, extra: float) -> np.ndarray:
        """∫_{t_0}^x s^extra w(s) ds for finite x > 0 (negative below t_0)."""
        t, v, p = self._grid
        pieces = v[:-1] * t[:-1] ** (-p) * power_integral(t[:-1], t[1:], p + extra)
        cum = np.concatenate(([0.0], np.cumsum(pieces)))
        j = np.searchsorted(t, x, side="right") - 1
        out = np.empty(x.shape)
        below = j < 0
        if np.any(below):
            ph = self.head_exponent
            out[below] = -v[0] * t[0] ** (-ph) * power_integral(x[below], t[0], ph + extra)
        above = j >= t.size - 1
        if np.any(above):
            pt = self.tail_exponent
            out[above] = cum[-1] + v[-1] * t[-1] ** (-pt) * power_integral(t[-1], x[above], pt + extra)
        mid = ~below & ~above
        if np.any(mid):
            jm = j[mid]
            out[mid] = cum[jm] + v[jm] * t[jm] ** (-p[jm]) * power_integral(t[jm], x[mid], p[jm] + extra)
        return out

    def integral(self, lo, hi, extra_power: float = 0.0) -> np.ndarray | float:
        scalar = np.ndim(lo) == 0 and np.ndim(hi) == 0
        lo_a, hi_a = np.broadcast_arrays(np.atleast_1d(np.asarray(lo, float)), np.atleast_1d(np.asarray(hi, float)))
        t, v, _ = self._grid
        out = np.zeros(lo_a.shape)
        live = hi_a > lo_a
        head_ok = self.head_integrable(extra_power)
        tail_ok = self.tail_integrable(extra_power)
        ph, pt = self.head_exponent, self.tail_exponent
        head_total = (v[0] * t[0] ** (-ph) * float(power_integral(0.0, t[0], ph + extra_power))) if head_ok else math.inf
        tail_total = (v[-1] * t[-1] ** (-pt) * float(power_integral(t[-1], math.inf, pt + extra_power))) if tail_ok else math.inf
        with np.errstate(invalid="ignore"):
            lo_f = np.where(lo_a > 0, lo_a, t[0])
            hi_f = np.where(np.isfinite(hi_a), hi_a, t[-1])
            a = np.where(lo_a > 0, self._primitive(lo_f, extra_power), -head_total)
            b = np.where(np.isfinite(hi_a), self._primitive(hi_f, extra_power), self._primitive(np.array([t[-1]]), extra_power)[0] + tail_total)
            res = b - a
        out[live] = res[live]
        return float(out[0]) if scalar else out

    def cumulative(self, s) -> np.ndarray | float:
        return self.integral(np.zeros_like(np.asarray(s, float)), s)

    def literal(self) -> str:
        digest = hashlib.sha256(np.asarray(self.values).tobytes() + np.asarray(self.t).tobytes()).hexdigest()[:10]
        return f"{self.label}[{len(self.t)} nodes:{digest}]"


Weight = PowerSVWeight | TabulatedWeight


# ---------------------------------------------------------------------------
# weight-class conditions


class WeightCheck(BaseModel):
    """Verdict of a weight-class condition."""

    model_config = ConfigDict(frozen=True)

    condition: str
    holds: bool
    constant: float = Field(..., description="sup of the defining ratio over the grid (inf if unbounded)")
    closed_form: bool = False
    heuristic: bool = Field(False, description="verdict rests on the grid stability heuristic")
    reason: Optional[str] = None


def default_weight_grid() -> np.ndarray:
    return log_grid(10.0 ** -6, 10.0 ** 6, 4)


def _stability_verdict(name: str, grid: np.ndarray, ratios: np.ndarray) -> WeightCheck:
    if not np.all(np.isfinite(ratios)):
        return WeightCheck(condition=name, holds=False, constant=math.inf, heuristic=True,
                           reason="ratio infinite at some grid point")
    top = float(np.max(ratios))
    inner = (grid >= grid[0] * 10) & (grid <= grid[-1] / 10)
    inner_top = float(np.max(ratios[inner])) if np.any(inner) else top
    stable = inner_top >= (1 - STABILITY_TOLERANCE) * top
    return WeightCheck(condition=name, holds=bool(stable), constant=top, heuristic=True,
                       reason=None if stable else "ratio still growing in the outermost decade")


def _require_head(w: Weight) -> None:
    if not w.head_integrable():
        raise DomainError("∫_0^t w diverges (non-integrable head)", quantity="w")


def check_Br(w: Weight, r: float, grid: Optional[np.ndarray] = None) -> WeightCheck:
    """B_r: sup_t t^r ∫_t^∞ s^{-r} w / ∫_0^t w < ∞."""
    if not r > 1:
        raise InputError("B_r needs r > 1")
    _require_head(w)
    if isinstance(w, PowerSVWeight) and w.is_pure_power:
        a = w.alpha + 1
        if a < r:
            return WeightCheck(condition="B_r", holds=True, constant=a / (r - a), closed_form=True)
        return WeightCheck(condition="B_r", holds=False, constant=math.inf, closed_form=True,
                           reason="∫_t^∞ s^{-r} w diverges")
    if not w.tail_integrable(-r):
        return WeightCheck(condition="B_r", holds=False, constant=math.inf, closed_form=True,
                           reason="∫_t^∞ s^{-r} w diverges")
    g = default_weight_grid() if grid is None else np.asarray(grid, float)
    num = g ** r * np.asarray(w.integral(g, np.full(g.shape, math.inf), -r))
    den = np.asarray(w.cumulative(g))
    return _stability_verdict("B_r", g, num / den)


def check_Brstar(w: Weight, r: float, grid: Optional[np.ndarray] = None) -> WeightCheck:
    """B_r*: sup_t t^r ∫_0^t s^{-r} w / ∫_0^t w < ∞ (r > 0)."""
    if not r > 0:
        raise InputError("B_r* needs r > 0")
    _require_head(w)
    if isinstance(w, PowerSVWeight) and w.is_pure_power:
        a = w.alpha + 1
        if a > r:
            return WeightCheck(condition="B_r*", holds=True, constant=a / (a - r), closed_form=True)
        return WeightCheck(condition="B_r*", holds=False, constant=math.inf, closed_form=True,
                           reason="∫_0^t s^{-r} w diverges")
    if not w.head_integrable(-r):
        return WeightCheck(condition="B_r*", holds=False, constant=math.inf, closed_form=True,
                           reason="∫_0^t s^{-r} w diverges")
    g = default_weight_grid() if grid is None else np.asarray(grid, float)
    num = g ** r * np.asarray(w.integral(np.zeros(g.shape), g, -r))
    den = np.asarray(w.cumulative(g))
    return _stability_verdict("B_r*", g, num / den)


def check_Binftystar(w: Weight, grid: Optional[np.ndarray] = None) -> WeightCheck:
    """B_∞*: sup_t ∫_0^t log(t/s) w(s) ds / ∫_0^t w < ∞."""
    _require_head(w)
    if isinstance(w, PowerSVWeight) and w.is_pure_power:
        a = w.alpha + 1
        return WeightCheck(condition="B_inf*", holds=True, constant=1.0 / a, closed_form=True)
    g = default_weight_grid() if grid is None else np.asarray(grid, float)
    bps = w.breakpoints
    num = np.array([quad_log(lambda s, t=t: math.log(t / s) * float(w(s)), 0.0, float(t), breakpoints=bps) for t in g])
    den = np.asarray(w.cumulative(g))
    return _stability_verdict("B_inf*", g, num / den)


# ---------------------------------------------------------------------------
# Hardy operators


def _as_piecewise(h: DecreasingProfile | PiecewiseProfile) -> PiecewiseProfile:
    return h.to_piecewise() if isinstance(h, DecreasingProfile) else h


def tabulated_piecewise(t: np.ndarray, v: np.ndarray) -> PiecewiseProfile:
    """Log-linear pieces through (t_i, v_i), constant below t_0 and above t_last."""
    t = np.asarray(t, float)
    v = np.asarray(v, float)
    slope = np.diff(v) / np.diff(np.log(t))
    a = np.concatenate(([v[0]], v[:-1] - slope * np.log(t[:-1]), [v[-1]]))
    b = np.concatenate(([0.0], slope, [0.0]))
    knots = np.concatenate(([0.0], t))
    z = np.zeros(knots.size)
    return PiecewiseProfile(knots, a, b, z, z, z)


def _tabulate(fn, h: PiecewiseProfile, per_decade: int = 16) -> PiecewiseProfile:
    grid = log_grid(math.exp(-LOG_WINDOW), math.exp(LOG_WINDOW), per_decade)
    vals = np.array([fn(float(t)) for t in grid])
    if np.any(~np.isfinite(vals)):
        raise DomainError("defining integral diverges", quantity="hardy")
    return tabulated_piecewise(grid, vals)


def hardy_P(h: DecreasingProfile | PiecewiseProfile) -> PiecewiseProfile:
    """(Ph)(t) = t^{-1}∫_0^t h."""
    return _as_piecewise(h).double_star()


def hardy_Q(h: DecreasingProfile | PiecewiseProfile) -> PiecewiseProfile:
    """(Qh)(t) = ∫_t^∞ h(s) ds/s; exact on step profiles."""
    g = _as_piecewise(h)
    if g.is_step:
        k, up, a = g.knots, g.upper, g.a
        if a[-1] != 0:
            raise DomainError("∫_t^∞ h(s) ds/s diverges (h does not vanish at infinity)", quantity="Q")
        kk = np.where(k > 0, k, 1.0)
        uu = np.where(np.isfinite(up), up, 1.0)
        full = np.where((k > 0) & np.isfinite(up), a * np.log(uu / kk), 0.0)
        after = np.concatenate((np.cumsum(full[::-1])[::-1][1:], [0.0]))
        new_a = a * np.log(uu) + after
        z = np.zeros(k.size)
        return PiecewiseProfile(k, new_a, -a, z, z, z)
    if not _vanishes_fast(g, 0.0):
        raise DomainError("∫_t^∞ h(s) ds/s diverges", quantity="Q")
    return _tabulate(lambda t: quad_log(lambda s: float(g(s)) / s, t, math.inf), g)


def hardy_Qeta(h: DecreasingProfile | PiecewiseProfile, eta: float) -> PiecewiseProfile:
    """(Q_η h)(t) = t^{-η}∫_t^∞ s^{η-1} h(s) ds, 0 < η < 1; exact on step profiles."""
    if not 0 < eta < 1:
        raise InputError("η must lie in (0, 1)")
    g = _as_piecewise(h)
    if g.is_step:
        k, up, a = g.knots, g.upper, g.a
        if a[-1] != 0:
            raise DomainError("∫_t^∞ s^{η-1} h diverges", quantity="Q_eta")
        upe = np.where(np.isfinite(up), up, 0.0) ** eta
        full = a * (upe - k ** eta) / eta
        full[-1] = 0.0
        after = np.concatenate((np.cumsum(full[::-1])[::-1][1:], [0.0]))
        d = np.where(np.isfinite(up), a * upe / eta, 0.0) + after
        z = np.zeros(k.size)
        return PiecewiseProfile(k, -a / eta, z, z, d, np.full(k.size, -eta))
    if not _vanishes_fast(g, eta):
        raise DomainError("∫_t^∞ s^{η-1} h diverges", quantity="Q_eta")
    return _tabulate(lambda t: t ** (-eta) * quad_log(lambda s: s ** (eta - 1) * float(g(s)), t, math.inf), g)


def _vanishes_fast(g: PiecewiseProfile, eta: float) -> bool:
    p, lp = g.leading_power(g.pieces - 1, "inf")
    tot = p + eta - 1
    return tot < -1 or (tot == -1 and lp < -1)


class BoundProbe(BaseModel):
    """Empirical operator-norm band over a set of test profiles."""

    model_config = ConfigDict(frozen=True)

    operator: str
    constant: float
    ratios: list[float]
    bounded: bool


def hardy_Q_bound_probe(w: Weight, r: float, profiles: Iterable[DecreasingProfile],
                        eta: Optional[float] = None) -> BoundProbe:
    """sup ‖Q h‖_{L_r(w)} / ‖h‖_{L_r(w)} (or Q_η) over non-increasing step profiles."""
    ratios = []
    for h in profiles:
        base = profile_integral(h.to_piecewise(), r, w) ** (1 / r)
        if not (base > 0 and math.isfinite(base)):
            continue
        q = hardy_Q(h) if eta is None else hardy_Qeta(h, eta)
        ratios.append(profile_integral(q, r, w) ** (1 / r) / base)
    const = max(ratios) if ratios else 0.0
    return BoundProbe(operator="Q" if eta is None else f"Q_{eta}", constant=const, ratios=ratios,
                      bounded=bool(ratios) and math.isfinite(const))


def qeta_bound_probe(w: Weight, r: float, eta: float, profiles: Iterable[DecreasingProfile]) -> BoundProbe:
    """Q_η band; expected finite exactly when w ∈ B*_{ηr}."""
    if not 0 < eta < 1:
        raise InputError("η must lie in (0, 1)")
    return hardy_Q_bound_probe(w, r, profiles, eta=eta)


# ---------------------------------------------------------------------------
# smooth regularizations of slowly varying factors


class SVRegularization:
    """
    Iterated averages of a slowly varying factor on a log grid.

    kind 'a': a_0 = 1/b, a_ℓ(t) = t^{-1}∫_0^t a_{ℓ-1};  kind 'c': c_0 = b, c_ℓ(t) = t∫_t^∞ c_{ℓ-1}(u)u^{-2}du.
    In x = log t both are first-order linear recursions; levels are stored as Hermite splines
    whose slopes come from x a_ℓ' = a_{ℓ-1} - a_ℓ (resp. c_ℓ - c_{ℓ-1}).
    """

    def __init__(self, b: SlowlyVarying, depth: int, kind: str, window: float = LOG_WINDOW):
        if kind not in ("a", "c"):
            raise InputError("kind must be 'a' or 'c'")
        if depth < 1:
            raise InputError("depth must be >= 1")
        if depth > MAX_REG_DEPTH:
            raise InputError(f"depth {depth} exceeds the limit {MAX_REG_DEPTH}")
        self.b = b
        self.depth = depth
        self.kind = kind
        self.window = window
        half = window + REG_PAD
        n = int(round(half / REG_STEP))
        self._x = np.arange(-n, n + 1) * REG_STEP
        self._levels: list[np.ndarray] = [self._base(self._x)]
        self._splines: list[Any] = [None]
        for _ in range(depth):
            self._add_level()

    def _base(self, x: np.ndarray) -> np.ndarray:
        vals = self.b(np.exp(x))
        return 1.0 / vals if self.kind == "a" else vals

    def _eval_level(self, level: int, x: np.ndarray) -> np.ndarray:
        if level == 0:
            return self._base(x)
        return self._splines[level](x)

    def _add_level(self) -> None:
        level = len(self._levels)
        x = self._x
        gx, gw = gauss_legendre(8)
        q = math.exp(-REG_STEP)
        left, right = x[:-1], x[1:]
        nodes = left[:, None] + 0.5 * REG_STEP * (gx[None, :] + 1.0)
        prev = self._eval_level(level - 1, nodes.ravel()).reshape(nodes.shape)
        if self.kind == "a":
            kern = np.exp(nodes - right[:, None])
            inc = (0.5 * REG_STEP * gw[None, :] * kern * prev).sum(axis=1)
            start = self._levels[level - 1][0]
            tail, _ = signal.lfilter([1.0], [1.0, -q], inc, zi=[q * start])
            vals = np.concatenate(([start], tail))
            slope = self._levels[level - 1] - vals
        else:
            kern = np.exp(left[:, None] - nodes)
            inc = (0.5 * REG_STEP * gw[None, :] * kern * prev).sum(axis=1)
            start = self._levels[level - 1][-1]
            rev, _ = signal.lfilter([1.0], [1.0, -q], inc[::-1], zi=[q * start])
            vals = np.concatenate((rev[::-1], [start]))
            slope = vals - self._levels[level - 1]
        self._levels.append(vals)
        self._splines.append(interpolate.CubicHermiteSpline(x, vals, slope))

    def level(self, ell: int, t) -> np.ndarray:
        if not 0 <= ell <= self.depth:
            raise InputError(f"level {ell} outside 0..{self.depth}")
        x = np.log(np.asarray(t, dtype=float))
        if np.any(np.abs(x) > self.window + REG_PAD / 2):
            raise DomainError("evaluation point outside the regularization window", quantity="t")
        return self._eval_level(ell, x)

    def __call__(self, t) -> np.ndarray:
        return self.level(self.depth, t)

    def band(self, lo: float = 1e-6, hi: float = 1e6, per_decade: int = 16) -> tuple[float, float]:
        """Range of a_N·b (kind 'a') or c_N/b (kind 'c') on a log grid."""
        g = log_grid(lo, hi, per_decade)
        ratio = self(g) * self.b(g) if self.kind == "a" else self(g) / self.b(g)
        return float(np.min(ratio)), float(np.max(ratio))


def sv_regularize_a(b: SlowlyVarying, depth: int) -> SVRegularization:
    return SVRegularization(b, depth, "a")


def sv_regularize_c(b: SlowlyVarying, depth: int) -> SVRegularization:
    return SVRegularization(b, depth, "c")


def sv_power_norm_band(b: SlowlyVarying, alpha: float, q: float,
                       grid: Optional[np.ndarray] = None) -> tuple[float, float]:
    """Band of ‖τ^{α-1/q} b(τ)‖_{L_q(0,t)} / (t^α b(t)) over the grid (α > 0)."""
    if not alpha > 0:
        raise InputError("alpha must be positive")
    g = log_grid(1e-6, 1e6, 4) if grid is None else np.asarray(grid, float)
    w = PowerSVWeight(alpha=alpha * q - 1, sv=b, power=q)
    vals = np.asarray(w.cumulative(g)) ** (1 / q) / (g ** alpha * b(g))
    return float(np.min(vals)), float(np.max(vals))


def bn_transform(b: SlowlyVarying, n: int) -> SlowlyVarying:
    """b_n(t) = 1/b(t^{-1/n}), closed on the log-power family."""
    if n < 1:
        raise InputError("n must be a positive integer")
    if not b.in_sv_up():
        raise PreconditionError("b_n is defined for non-decreasing slowly varying b", condition="SV_up")
    pieces = []
    for p in reversed(b.pieces):
        lo = 0.0 if math.isinf(p.hi) else p.hi ** (-n)
        hi = math.inf if p.lo == 0 else p.lo ** (-n)
        pieces.append(SVPiece(lo=lo, hi=hi, gamma=-p.gamma, log_scale=p.log_scale / n, factor=1.0 / p.factor))
    return SlowlyVarying(pieces=tuple(pieces))


def sv_product(a: SlowlyVarying, b: SlowlyVarying) -> SlowlyVarying:
    """a·b on merged pieces; overlapping non-trivial pieces must share the log scale."""
    cuts = sorted(set(a.breakpoints) | set(b.breakpoints))
    edges = [0.0, *cuts, math.inf]
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 2.0 * lo if math.isinf(hi) else (0.5 * hi if lo == 0 else math.sqrt(lo * hi))
        pa = a.pieces[int(np.searchsorted([p.lo for p in a.pieces], mid, side="right")) - 1]
        pb = b.pieces[int(np.searchsorted([p.lo for p in b.pieces], mid, side="right")) - 1]
        if pa.gamma != 0 and pb.gamma != 0 and pa.log_scale != pb.log_scale:
            raise PreconditionError("product leaves the log-power family (different log scales)",
                                    condition="sv_product")
        lead = pa if pa.gamma != 0 else pb
        pieces.append(SVPiece(lo=lo, hi=hi, gamma=pa.gamma + pb.gamma, log_scale=lead.log_scale,
                              factor=pa.factor * pb.factor))
    return SlowlyVarying(pieces=tuple(pieces))


# ---------------------------------------------------------------------------
# associate weights


def _conjugate(r: float) -> float:
    if not r > 1:
        raise InputError("r must exceed 1")
    return r / (r - 1)


def associate_grid(per_decade: int = 8) -> np.ndarray:
    return log_grid(math.exp(-LOG_WINDOW), math.exp(LOG_WINDOW), per_decade)


def associate_weight_bar(w: PowerSVWeight, m: int, n: int, r: float) -> Weight:
    """w̄(t) = t^{-mr/n-r} w(t) (∫_t^∞ s^{-mr/n-r} w)^{-r'} under ∫_0^∞ t^{-mr/n-r} w = ∞."""
    rp = _conjugate(r)
    beta = -m * r / n - r
    if w.head_integrable(beta) and w.tail_integrable(beta):
        raise PreconditionError("∫_0^∞ t^{-mr/n-r} w dt must diverge", condition="divergence")
    if not w.tail_integrable(beta):
        raise DomainError("∫_t^∞ s^{-mr/n-r} w diverges", quantity="w_bar")
    if w.is_pure_power:
        big = w.alpha + beta
        mu = -big - 1
        c = w.effective_scale
        return PowerSVWeight(alpha=big - rp * (big + 1), scale=c ** (1 - rp) * mu ** rp)
    g = associate_grid()
    seg = np.asarray(w.integral(g[:-1], g[1:], beta))
    last = float(w.integral(g[-1], math.inf, beta))
    tails = np.concatenate((np.cumsum(seg[::-1])[::-1] + last, [last]))
    vals = g ** beta * w(g) * tails ** (-rp)
    return TabulatedWeight.from_arrays(g, vals, label="w_bar")


def second_associate_nu(wbar: Weight, r: float) -> Weight:
    """ν(t) = t^{r+r'-1} A B / (A + t^{r'} B)^{r+1}, A = ∫_0^t w̄, B = ∫_t^∞ s^{-r'} w̄."""
    rp = _conjugate(r)
    if not wbar.head_integrable():
        raise DomainError("∫_0^t w̄ diverges", quantity="nu")
    if not wbar.tail_integrable(-rp):
        raise DomainError("∫_t^∞ s^{-r'} w̄ diverges", quantity="nu")
    if isinstance(wbar, PowerSVWeight) and wbar.is_pure_power:
        lam = wbar.alpha + 1
        c = wbar.effective_scale
        const = c ** (1 - r) * (lam * (rp - lam)) ** r * rp ** (-(r + 1))
        return PowerSVWeight(alpha=(r - 1) * (1 - lam), scale=const)
    g = associate_grid()
    head = float(wbar.integral(0.0, g[0]))
    a_cum = head + np.concatenate(([0.0], np.cumsum(np.asarray(wbar.integral(g[:-1], g[1:])))))
    seg = np.asarray(wbar.integral(g[:-1], g[1:], -rp))
    last = float(wbar.integral(g[-1], math.inf, -rp))
    b_tail = np.concatenate((np.cumsum(seg[::-1])[::-1] + last, [last]))
    vals = g ** (r + rp - 1) * a_cum * b_tail / (a_cum + g ** rp * b_tail) ** (r + 1)
    return TabulatedWeight.from_arrays(g, vals, label="nu")


def associate_reference(p: float, r: float, m: int, n: int, b: SlowlyVarying) -> tuple[PowerSVWeight, PowerSVWeight]:
    """
    Closed power-log shapes of w̄ and ν for w = t^{r/p-1} b^r, normalized by the exact constants
    of the b ≡ 1 case.
    """
    rp = _conjugate(r)
    pp = p / (p - 1) if p > 1 else math.inf
    beta = r / p - 1 - m * r / n - r
    cw = (-beta - 1) ** rp
    lam = m * rp / n + (rp / pp if math.isfinite(pp) else 0.0)
    cnu = cw ** (1 - r) * (lam * (rp - lam)) ** r * rp ** (-(r + 1))
    wbar = PowerSVWeight(alpha=lam - 1, sv=b, power=-rp, scale=cw)
    nu = PowerSVWeight(alpha=r * (1 / p - m / n) - 1, sv=b, power=r, scale=cnu)
    return wbar, nu


def associate_band(computed: Weight, reference: Weight, lo: float = 1e-4, hi: float = 1e4) -> tuple[float, float]:
    """Range of computed/reference over a log grid."""
    g = log_grid(lo, hi, 16)
    ratio = np.asarray(computed(g)) / np.asarray(reference(g))
    return float(np.min(ratio)), float(np.max(ratio))
