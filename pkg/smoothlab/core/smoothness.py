"""
Fractional differences, measured moduli of smoothness, K-functional upper estimates and the
explicit K-formula for the (X, S_X) couple.

Shifts are lattice vectors (commensurate h); zero extension outside the box. Moduli are sups
over a finite shift set, so for n >= 2 they are lower bounds of the true sup.

Config (env): SMOOTHLAB_MAX_SHIFT_MAGNITUDES (default 256) caps distinct shift lengths per
curve; longer ranges are subsampled geometrically.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage, signal
from scipy.special import comb

from smoothlab.core.gridfn import DecreasingProfile, GridFunction, Interpolation, rearrange, shift_values
from smoothlab.core.quadrature import log_panels, panel_sums, power_integral, quad_log
from smoothlab.core.weights import PowerSVWeight
from smoothlab.observability.logging import get_logger
from smoothlab.observability.metrics import record_modulus_curve, record_norm_evaluation
from smoothlab.shared.env_helpers import get_int_env
from smoothlab.shared.errors import DomainError, InputError, PreconditionError

logger = get_logger(__name__)

MAX_SHIFT_MAGNITUDES = get_int_env("SMOOTHLAB_MAX_SHIFT_MAGNITUDES", default=256)
DENSE_SHIFTS = 64
STEKLOV_SCALES = 15
SLOPE_POINTS = 4


def _is_integer(kappa: float) -> bool:
    return abs(kappa - round(kappa)) < 1e-12


def frac_binom(kappa: float, nu: int) -> float:
    """binom(κ, ν) = κ(κ-1)...(κ-ν+1)/ν!, by the recurrence b_ν = b_{ν-1}(κ-ν+1)/ν."""
    if nu < 0:
        raise InputError("ν must be >= 0")
    b = 1.0
    for j in range(1, nu + 1):
        b *= (kappa - j + 1) / j
    return b


def difference_coefficients(kappa: float, terms: int) -> np.ndarray:
    """c_ν = (-1)^ν binom(κ, ν) for ν = 0..terms."""
    nu = np.arange(1, terms + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((nu - 1.0 - kappa) / nu)))


class FracDiffParams(BaseModel):
    """Order and truncation control of Δ_h^κ."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kappa: float = Field(..., gt=0)
    tail_tol: float = Field(1e-8, gt=0)
    max_terms: int = Field(10_000, ge=1)
    interpolate: bool = Field(False, description="allow non-commensurate h via linear interpolation")

    @property
    def is_integer(self) -> bool:
        return _is_integer(self.kappa)

    def tail_constant(self) -> tuple[int, float]:
        """(ν0, C) with |binom(κ, ν)| <= C ν^{-κ-1} for ν >= ν0."""
        nu0 = int(math.floor(self.kappa)) + 1
        return nu0, abs(frac_binom(self.kappa, nu0)) * nu0 ** (self.kappa + 1)

    def tail_terms(self) -> int:
        """Smallest M with Σ_{ν>M} |binom(κ, ν)| <= tail_tol (certified by the power bound)."""
        if self.is_integer:
            return int(round(self.kappa))
        nu0, c = self.tail_constant()
        m = (c / (self.kappa * self.tail_tol)) ** (1.0 / self.kappa)
        return max(nu0, int(math.ceil(m))) if math.isfinite(m) else 2 ** 62

    def truncation(self, box_terms: Optional[int] = None) -> int:
        """
        Number of terms after ν = 0. Terms beyond `box_terms` vanish under zero extension, so a
        box that fits within max_terms gives the exact sum.
        """
        if self.is_integer:
            k = int(round(self.kappa))
            return k if box_terms is None else min(k, max(box_terms, 0))
        if box_terms is not None and box_terms <= self.max_terms:
            return max(box_terms, 0)
        m = self.tail_terms()
        if m > self.max_terms:
            raise PreconditionError(
                f"tail tolerance {self.tail_tol:g} needs {m} terms (> max_terms {self.max_terms})",
                condition="truncation",
            )
        return m if box_terms is None else min(m, box_terms)


def binom_abs_sum(kappa: float, terms: int = 100_000) -> float:
    """Upper bound of Σ_ν |binom(κ, ν)| (exactly 2^κ for integer κ)."""
    if _is_integer(kappa):
        return 2.0 ** round(kappa)
    c = difference_coefficients(kappa, terms)
    params = FracDiffParams(kappa=kappa)
    nu0, const = params.tail_constant()
    return float(np.sum(np.abs(c)) + const * terms ** (-kappa) / kappa)


def lattice_steps(f: GridFunction, h: Sequence[float]) -> Optional[tuple[int, ...]]:
    """h in cells when every component is a multiple of the axis spacing, else None."""
    steps = []
    for hj, dx in zip(h, f.spacing):
        s = hj / dx
        r = round(s)
        if abs(s - r) > 1e-9 * max(1.0, abs(s)):
            return None
        steps.append(int(r))
    return tuple(steps)


def _box_terms(shape: Sequence[int], steps: Sequence[float]) -> int:
    lim = [int(math.floor((n - 1) / abs(s))) for n, s in zip(shape, steps) if s != 0]
    return min(lim) if lim else 0


def _correlate_lattice(values: np.ndarray, steps: Sequence[int], coeffs: np.ndarray) -> np.ndarray:
    """out[x] = Σ_ν coeffs[ν] values[x + ν s] with zero extension, by FFT convolution."""
    flip = tuple(j for j, s in enumerate(steps) if s < 0)
    v = np.flip(values, axis=flip) if flip else values
    a = [abs(int(s)) for s in steps]
    m = coeffs.size - 1
    shape = tuple(m * s + 1 for s in a)
    kernel = np.zeros(shape)
    kernel[tuple(np.arange(m + 1) * s for s in a)] = coeffs
    full = signal.fftconvolve(v, kernel[(slice(None, None, -1),) * v.ndim], mode="full")
    out = full[tuple(slice(L - 1, L - 1 + n) for L, n in zip(shape, v.shape))]
    return np.flip(out, axis=flip) if flip else out


def _difference_values(f: GridFunction, h: Sequence[float], params: FracDiffParams) -> np.ndarray:
    if len(h) != f.dim:
        raise InputError(f"shift has {len(h)} components, grid has {f.dim} axes")
    vals = f.values
    steps = lattice_steps(f, h)
    if steps is not None:
        if not any(steps):
            return np.zeros_like(vals)
        m = params.truncation(_box_terms(vals.shape, steps))
        coeffs = difference_coefficients(params.kappa, m)
        if params.is_integer:
            out = np.zeros_like(vals)
            for nu, c in enumerate(coeffs):
                out += c * shift_values(vals, [nu * s for s in steps])
            return out
        return _correlate_lattice(vals, steps, coeffs)
    if not params.interpolate:
        raise InputError("shift is not a multiple of the grid spacing (enable interpolate)")
    cells = [hj / dx for hj, dx in zip(h, f.spacing)]
    m = params.truncation(_box_terms(vals.shape, cells))
    coeffs = difference_coefficients(params.kappa, m)
    out = np.zeros_like(vals)
    for nu, c in enumerate(coeffs):
        out += c * ndimage.shift(vals, [-nu * s for s in cells], order=1, mode="constant", cval=0.0)
    return out


def frac_diff(f: GridFunction, h: Sequence[float], params: FracDiffParams) -> GridFunction:
    """Δ_h^κ f(x) = Σ_ν (-1)^ν binom(κ, ν) f(x + ν h); h = 0 gives the zero function."""
    return f.with_values(_difference_values(f, h, params))


# ---------------------------------------------------------------------------
# shift sets


def _magnitude_ladder(count: int) -> np.ndarray:
    """1..count, subsampled geometrically above DENSE_SHIFTS when count exceeds the cap."""
    if count <= MAX_SHIFT_MAGNITUDES:
        return np.arange(1, count + 1)
    dense = np.arange(1, DENSE_SHIFTS + 1)
    sparse = np.unique(np.round(np.geomspace(DENSE_SHIFTS, count, MAX_SHIFT_MAGNITUDES - DENSE_SHIFTS)).astype(int))
    return np.unique(np.concatenate((dense, sparse)))


def _directions(dim: int, samples: int) -> np.ndarray:
    if dim == 2:
        ang = 2 * np.pi * np.arange(samples) / samples
        dirs = np.stack((np.cos(ang), np.sin(ang)), axis=1)
    else:
        i = np.arange(samples) + 0.5
        phi = np.arccos(1 - 2 * i / samples)
        th = np.pi * (1 + 5 ** 0.5) * i
        dirs = np.stack((np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)), axis=1)
    axes = np.concatenate((np.eye(dim), -np.eye(dim)))
    return np.concatenate((dirs, axes))


def shift_set(f: GridFunction, u_max: float, mode: str = "axis",
              dir_samples: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Lattice shift vectors (cells) with |h| <= u_max and their Euclidean lengths |h|."""
    if mode not in ("axis", "full"):
        raise InputError(f"unknown direction mode {mode!r}")
    dx = np.asarray(f.spacing)
    vecs: list[np.ndarray] = []
    if f.dim == 1 or mode == "axis":
        for j in range(f.dim):
            count = int(math.floor(u_max / dx[j] + 1e-9))
            if count < 1:
                continue
            mags = _magnitude_ladder(count)
            for sign in (1, -1):
                v = np.zeros((mags.size, f.dim), dtype=int)
                v[:, j] = sign * mags
                vecs.append(v)
    else:
        step = float(dx.min())
        count = int(math.floor(u_max / step + 1e-9))
        if count >= 1:
            mags = _magnitude_ladder(count) * step
            for d in _directions(f.dim, dir_samples):
                v = np.round(mags[:, None] * d[None, :] / dx[None, :]).astype(int)
                vecs.append(v)
    if not vecs:
        return np.zeros((0, f.dim), dtype=int), np.zeros(0)
    allv = np.unique(np.concatenate(vecs), axis=0)
    allv = allv[np.any(allv != 0, axis=1)]
    lengths = np.sqrt(((allv * dx[None, :]) ** 2).sum(axis=1))
    keep = lengths <= u_max * (1 + 1e-9)
    return allv[keep], lengths[keep]


# ---------------------------------------------------------------------------
# measured modulus curves


def _head_ok(power: float, logpow: float) -> bool:
    return power > 0 or (power == 0 and logpow < -1)


@dataclass(frozen=True)
class ModulusCurve:
    """
    ω_κ(f, u)_X measured at shift lengths u_i (running max, so non-decreasing). Below u_0 the
    curve is extrapolated as v_0 (u/u_0)^slope with the measured slope clipped to [0, κ]; beyond
    u_max it is held constant.
    """

    kappa: float
    u: np.ndarray
    values: np.ndarray
    slope: float
    space: str = ""
    mode: str = "axis"
    dim: int = 1
    u_max: float = 0.0
    norm_evaluations: int = field(default=0, compare=False)

    @property
    def one_sided(self) -> bool:
        """Sampled sup over directions (n >= 2): the curve is a lower bound."""
        return self.dim >= 2

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values > 0)

    def __call__(self, t) -> np.ndarray | float:
        arr = np.asarray(t, dtype=float)
        flat = arr.ravel()
        out = np.zeros(flat.shape)
        if self.u.size:
            idx = np.searchsorted(self.u, flat * (1 + 1e-12), side="right") - 1
            above = idx >= 0
            out[above] = self.values[idx[above]]
            below = ~above & (flat > 0)
            out[below] = self.values[0] * (flat[below] / self.u[0]) ** self.slope
        out = out.reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    def _segments(self, lo: float, hi: float) -> list[tuple[float, float, float, float]]:
        """(a, b, value, extra exponent) pieces covering [lo, hi]; extra != 0 only below u_0."""
        segs = []
        if not self.u.size or hi <= lo:
            return segs
        u0 = float(self.u[0])
        if lo < u0:
            segs.append((lo, min(hi, u0), float(self.values[0]) * u0 ** (-self.slope), self.slope))
        edges = np.append(self.u, np.inf)
        for i in range(self.u.size):
            a, b = max(lo, float(edges[i])), min(hi, float(edges[i + 1]))
            if b > a and self.values[i] > 0:
                segs.append((a, b, float(self.values[i]), 0.0))
        return segs

    def weighted_norm(self, lo: float, hi: float, e: float, q: float,
                      factor: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                      factor_log_power_zero: float = 0.0) -> float:
        """(∫_lo^hi (u^e factor(u) ω(u))^q du/u)^{1/q}; q = inf gives the sup. +inf when divergent."""
        if not q >= 1:
            raise InputError("q must be >= 1")
        segs = [s for s in self._segments(lo, hi) if s[2] > 0]
        if not segs:
            return 0.0
        if math.isinf(q):
            best = 0.0
            for a, b, v, extra in segs:
                if a == 0:
                    if not (e + extra > 0 or (e + extra == 0 and factor_log_power_zero <= 0)):
                        return math.inf
                    pts = b * np.geomspace(1e-6, 1.0, 13)
                else:
                    pts = np.geomspace(a, b, 5) if math.isfinite(b) else np.array([a])
                vals = v * pts ** (e + extra)
                if factor is not None:
                    vals = vals * np.asarray(factor(pts))
                best = max(best, float(np.max(vals)))
            return best
        total = 0.0
        for a, b, v, extra in segs:
            beta = (e + extra) * q - 1.0
            if a == 0 and not _head_ok((e + extra) * q, factor_log_power_zero * q):
                return math.inf
            if math.isinf(b) and not beta < -1:
                return math.inf
            if factor is None:
                total += v ** q * float(power_integral(a, b, beta))
            elif a > 0 and math.isfinite(b):
                t, w, own = log_panels(np.array([a]), np.array([b]))
                total += v ** q * float(panel_sums(t ** beta * np.asarray(factor(t)) ** q, w, own, 1)[0])
            else:
                total += v ** q * quad_log(lambda s: s ** beta * float(factor(np.array([s]))[0]) ** q, a, b,
                                           breakpoints=(1.0,))
        return total ** (1.0 / q)

    def head(self, t: float, e: float, q: float, factor=None, factor_log_power_zero: float = 0.0) -> float:
        """(∫_0^t (u^e factor ω)^q du/u)^{1/q}; factor ~ |log u|^factor_log_power_zero near 0."""
        return self.weighted_norm(0.0, t, e, q, factor, factor_log_power_zero)

    def tail(self, t: float, e: float, q: float, upper: float = 1.0, factor=None) -> float:
        """(∫_t^upper (u^e factor ω)^q du/u)^{1/q}."""
        return self.weighted_norm(t, upper, e, q, factor)

    def sup_tail(self, t: float, e: float, upper: float = 1.0) -> float:
        """sup_{t <= u < upper} u^e ω(u)."""
        return self.weighted_norm(t, upper, e, math.inf)

    def to_csv(self) -> str:
        lines = ["t,omega"]
        lines += [f"{float(a)!r},{float(b)!r}" for a, b in zip(self.u, self.values)]
        return "\n".join(lines) + "\n"


def _fit_slope(u: np.ndarray, v: np.ndarray, kappa: float) -> float:
    pos = np.flatnonzero(v > 0)
    if pos.size < 2:
        return kappa
    j = pos[: SLOPE_POINTS + 1]
    s = math.log(v[j[-1]] / v[j[0]]) / math.log(u[j[-1]] / u[j[0]])
    return float(min(max(s, 0.0), kappa))


def modulus_curve(f: GridFunction, kappa: float, spec, u_max: float, mode: str = "axis",
                  dir_samples: Optional[int] = None, params: Optional[FracDiffParams] = None) -> ModulusCurve:
    """Measured ω_κ(f, ·)_X on all lattice shift lengths up to u_max."""
    from smoothlab.shared.settings import get_lab_settings

    if not u_max > 0:
        raise InputError("u_max must be positive")
    params = params or FracDiffParams(kappa=kappa)
    if dir_samples is None:
        dir_samples = get_lab_settings().DIR_SAMPLES
    started = time.perf_counter()
    vecs, lengths = shift_set(f, u_max, mode, dir_samples)
    dx = np.asarray(f.spacing)
    norms = np.empty(lengths.size)
    for i, s in enumerate(vecs):
        diff = _difference_values(f, s * dx, params)
        norms[i] = spec.profile_norm(rearrange(f.with_values(diff)))
    record_norm_evaluation(spec.kind, int(lengths.size))
    if lengths.size:
        u, inv = np.unique(np.round(lengths, 12), return_inverse=True)
        peak = np.zeros(u.size)
        np.maximum.at(peak, inv, norms)
        values = np.maximum.accumulate(peak)
    else:
        u, values = np.zeros(0), np.zeros(0)
    elapsed = time.perf_counter() - started
    record_modulus_curve(elapsed)
    logger.debug("modulus_curve", kappa=kappa, space=spec.literal(), shifts=int(lengths.size),
                 mode=mode, seconds=round(elapsed, 4))
    return ModulusCurve(kappa=kappa, u=u, values=values, slope=_fit_slope(u, values, kappa),
                        space=spec.literal(), mode=mode, dim=f.dim, u_max=u_max,
                        norm_evaluations=int(lengths.size))


def modulus(f: GridFunction, t: float, kappa: float, spec, dir_samples: int = 16, mode: str = "axis") -> float:
    """ω_κ(f, t)_X = sup over sampled shifts |h| <= t of ‖Δ_h^κ f‖_X."""
    if not t > 0:
        raise InputError("t must be positive")
    curve = modulus_curve(f, kappa, spec, t, mode=mode, dir_samples=dir_samples)
    return float(curve.values[-1]) if curve.values.size else 0.0


def regularize_quasiconcave(t: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Running max of K, then running min of K(s)/s scaled back: non-decreasing with K/t non-increasing."""
    t = np.asarray(t, dtype=float)
    up = np.maximum.accumulate(np.asarray(k, dtype=float))
    return t * np.minimum.accumulate(up / t)


# ---------------------------------------------------------------------------
# K-functional upper estimates


def _steklov(values: np.ndarray, cells: Sequence[int], power: int) -> np.ndarray:
    out = values
    for _ in range(power):
        for axis, L in enumerate(cells):
            if L > 1:
                out = ndimage.uniform_filter1d(out, size=L, axis=axis, mode="constant", cval=0.0)
    return out


def derivative_seminorm(f: GridFunction, values: np.ndarray, k: int, spec) -> float:
    """Σ_{|α|=k} ‖∂^α g‖_X with forward differences."""
    total = 0.0
    dx = f.spacing
    for alpha in itertools.combinations_with_replacement(range(f.dim), k):
        d = values
        scale = 1.0
        for axis in alpha:
            step = [0] * f.dim
            step[axis] = 1
            d = shift_values(d, step) - d
            scale *= dx[axis]
        total += spec.profile_norm(rearrange(f.with_values(d / scale)))
    return total


def steklov_candidate(f: GridFunction, h: float, k: int) -> np.ndarray:
    """g_h = Σ_{j=1}^k (-1)^{j+1} binom(k, j) (S_{jh/k})^k f."""
    out = np.zeros_like(f.values)
    for j in range(1, k + 1):
        cells = [max(1, int(round(j * h / k / dx))) for dx in f.spacing]
        out += (-1) ** (j + 1) * comb(k, j, exact=True) * _steklov(f.values, cells, k)
    return out


def k_upper(f: GridFunction, t: float, k: int, spec, scales: int = STEKLOV_SCALES) -> float:
    """
    Upper estimate of K(f, t^k; X, W^k X) = inf_g ‖f - g‖_X + t^k |g|_{W^k X}, minimizing over
    g = 0, g = f and Steklov candidates at `scales` log-spaced h in [t/8, 8t].
    """
    if not t > 0:
        raise InputError("t must be positive")
    if k < 1:
        raise InputError("k must be >= 1")
    fnorm = spec.profile_norm(rearrange(f))
    if fnorm == 0:
        return 0.0
    best = fnorm
    tk = t ** k
    best = min(best, tk * derivative_seminorm(f, f.values, k, spec))
    for h in np.geomspace(t / 8, 8 * t, scales):
        g = steklov_candidate(f, float(h), k)
        rest = spec.profile_norm(rearrange(f.with_values(f.values - g)))
        if rest >= best:
            continue
        best = min(best, rest + tk * derivative_seminorm(f, g, k, spec))
    return float(best)


class KSXProfile(BaseModel):
    """Both equivalent forms of K(f, t; X, S_X) at one t."""

    model_config = ConfigDict(frozen=True)

    t: float
    tau: float
    head_a: float
    head_b: float
    tail: float

    @property
    def form_a(self) -> float:
        return self.head_a + self.tail

    @property
    def form_b(self) -> float:
        return self.head_b + self.tail


def k_sx_profile(f: GridFunction, spec, k: int, n: int, t: float) -> KSXProfile:
    """
    τ = t^{n/k}. form A: ‖(f*(s) - f*(τ)) χ_(0,τ)‖ + tail; form B: ‖(f** - f*) χ_(0,τ)‖ + tail;
    tail = t ‖s^{-k/n} (f** - f*)(s) χ_(τ,∞)‖, all in the representation norm of X.
    """
    from smoothlab.core.spaces import representation_norm, sample_integrand

    if not t > 0:
        raise InputError("t must be positive")
    if k < 1 or n < 1:
        raise InputError("k and n must be positive")
    tau = t ** (n / k)
    star = rearrange(f)
    level = float(star(tau))
    inside = star.t < tau
    knots = np.append(star.t[inside], tau)
    heights = np.append(star.v[inside] - level, 0.0)
    head_a = spec.profile_norm(DecreasingProfile(knots, np.maximum(heights, 0.0), Interpolation.STEP))
    pw = star.to_piecewise()
    osc = pw.oscillation()
    one = PowerSVWeight(alpha=0.0)
    vals, meas = sample_integrand(osc, one, pw.knots, window=(0.0, tau))
    head_b = representation_norm(spec, vals, meas)
    vals, meas = sample_integrand(osc, PowerSVWeight(alpha=-k / n), pw.knots, window=(tau, math.inf))
    tail = t * representation_norm(spec, vals, meas)
    if not math.isfinite(head_a + head_b + tail):
        raise DomainError("non-finite K-formula term", quantity="k_sx")
    return KSXProfile(t=t, tau=tau, head_a=head_a, head_b=head_b, tail=tail)
