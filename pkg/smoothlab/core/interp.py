"""
Lattices F over ((0, inf), du/u) with ‖h‖_F = ‖u^{-θ}(1+|log u|)^γ h(u)‖_{L_q(du/u)}, their
fundamental functions Ξ, Θ, generalized reverse functions and the two-term Holmstedt-type
expressions evaluated on quasiconcave K-profiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from smoothlab.core.gridfn import _readonly, read_two_column_csv, _two_column_csv
from smoothlab.core.literals import parse_call, parse_number
from smoothlab.core.quadrature import power_integral
from smoothlab.core.smoothness import regularize_quasiconcave
from smoothlab.core.weights import LOG_WINDOW, PowerSVWeight, SlowlyVarying
from smoothlab.shared.errors import DomainError, InputError, RangeError

MONOTONE_SLACK = 1e-12
BISECTION_STEPS = 200


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class PowerPieces:
    """h(u) = coef_i u^{expo_i} on [knots_i, knots_{i+1}); knots_0 = 0, last piece unbounded."""

    knots: np.ndarray
    coef: np.ndarray
    expo: np.ndarray

    def __post_init__(self) -> None:
        k, c, e = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (self.knots, self.coef, self.expo))
        if not (k.shape == c.shape == e.shape) or k.ndim != 1:
            raise InputError("power pieces need matching 1-d arrays")
        if k[0] != 0 or np.any(np.diff(k) <= 0):
            raise InputError("knots must start at 0 and increase strictly")
        object.__setattr__(self, "knots", _readonly(k))
        object.__setattr__(self, "coef", _readonly(c))
        object.__setattr__(self, "expo", _readonly(e))

    @classmethod
    def power(cls, c: float = 1.0, beta: float = 1.0) -> "PowerPieces":
        return cls([0.0], [c], [beta])

    @classmethod
    def min_identity(cls, t: float) -> "PowerPieces":
        """u ↦ min(u, t)."""
        return cls([0.0, t], [1.0, t], [1.0, 0.0])

    @property
    def upper(self) -> np.ndarray:
        return np.append(self.knots[1:], np.inf)

    def __call__(self, u) -> np.ndarray | float:
        arr = np.asarray(u, dtype=float)
        flat = arr.ravel()
        idx = np.clip(np.searchsorted(self.knots, flat, side="right") - 1, 0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(self.coef[idx] != 0, self.coef[idx] * flat ** self.expo[idx], 0.0)
        out = out.reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    def scaled(self, c: float) -> "PowerPieces":
        return PowerPieces(self.knots, c * self.coef, self.expo)

    def times_power(self, beta: float) -> "PowerPieces":
        return PowerPieces(self.knots, self.coef, self.expo + beta)


@dataclass(frozen=True)
class QuasiconcaveProfile:
    """
    K_i > 0 on a log grid t_i with K non-decreasing and K/t non-increasing (slack 1e-12).
    Between nodes K is a power of s (log-log linear); below t_0 it is K_0 (s/t_0)^head_exponent,
    above t_last K_last (s/t_last)^tail_exponent; both exponents lie in [0, 1].
    """

    t: np.ndarray
    values: np.ndarray
    head_exponent: float = 1.0
    tail_exponent: float = 0.0

    def __post_init__(self) -> None:
        t = np.atleast_1d(np.asarray(self.t, dtype=float))
        k = np.atleast_1d(np.asarray(self.values, dtype=float))
        if t.shape != k.shape or t.size < 1:
            raise InputError("profile needs matching non-empty arrays")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise InputError("profile grid must be positive and increasing")
        if np.any(~np.isfinite(k)) or np.any(k < 0):
            raise InputError("profile values must be finite and >= 0")
        scale = max(1.0, float(np.max(k)))
        if np.any(np.diff(k) < -MONOTONE_SLACK * scale):
            raise InputError("K must be non-decreasing")
        ratio = k / t
        if np.any(np.diff(ratio) > MONOTONE_SLACK * max(1.0, float(np.max(ratio)))):
            raise InputError("K(t)/t must be non-increasing")
        for name in ("head_exponent", "tail_exponent"):
            if not 0 <= getattr(self, name) <= 1:
                raise InputError(f"{name} must lie in [0, 1]")
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "values", _readonly(k))

    @classmethod
    def from_measurements(cls, t, k, **kw: Any) -> "QuasiconcaveProfile":
        """Regularize measured values (running max, then running min of K/t) first."""
        return cls(np.asarray(t, float), regularize_quasiconcave(t, k), **kw)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values > 0)

    def to_pieces(self) -> PowerPieces:
        t, k = self.t, self.values
        knots = [0.0]
        coef = [k[0] * t[0] ** (-self.head_exponent)]
        expo = [self.head_exponent]
        for i in range(t.size - 1):
            knots.append(t[i])
            if k[i] > 0 and k[i + 1] > 0:
                e = math.log(k[i + 1] / k[i]) / math.log(t[i + 1] / t[i])
                coef.append(k[i] * t[i] ** (-e))
                expo.append(e)
            else:
                coef.append(0.0 if k[i + 1] == 0 else k[i + 1])
                expo.append(0.0)
        knots.append(t[-1])
        coef.append(k[-1] * t[-1] ** (-self.tail_exponent))
        expo.append(self.tail_exponent)
        return PowerPieces(np.array(knots), np.array(coef), np.array(expo))

    def __call__(self, s) -> np.ndarray | float:
        return self.to_pieces()(s)

    def scaled(self, c: float) -> "QuasiconcaveProfile":
        return QuasiconcaveProfile(self.t, c * self.values, self.head_exponent, self.tail_exponent)

    def to_csv(self) -> str:
        return _two_column_csv(self.t, self.values, header=("t", "K"))

    @classmethod
    def from_csv(cls, text: str, regularize: bool = True) -> "QuasiconcaveProfile":
        t, k = read_two_column_csv(text)
        return cls.from_measurements(t, k) if regularize else cls(t, k)


Profile = Union[PowerPieces, QuasiconcaveProfile]


def _pieces(h: Profile) -> PowerPieces:
    return h.to_pieces() if isinstance(h, QuasiconcaveProfile) else h


@dataclass(frozen=True)
class StepMonotone:
    """
    Left-continuous non-decreasing step function: levels[0] on (0, breaks[0]], levels[i] on
    (breaks[i-1], breaks[i]], levels[-1] beyond the last break.
    """

    breaks: np.ndarray
    levels: np.ndarray

    def __post_init__(self) -> None:
        b = np.atleast_1d(np.asarray(self.breaks, dtype=float))
        v = np.atleast_1d(np.asarray(self.levels, dtype=float))
        if v.size != b.size + 1:
            raise InputError("need one more level than breaks")
        if np.any(b <= 0) or np.any(np.diff(b) <= 0):
            raise InputError("breaks must be positive and increasing")
        if np.any(np.diff(v) < 0):
            raise InputError("levels must be non-decreasing")
        object.__setattr__(self, "breaks", _readonly(b))
        object.__setattr__(self, "levels", _readonly(v))

    def __call__(self, tau) -> np.ndarray | float:
        arr = np.asarray(tau, dtype=float)
        out = self.levels[np.searchsorted(self.breaks, arr.ravel(), side="left")].reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    def value_range(self) -> tuple[float, float]:
        return float(self.levels[0]), float(self.levels[-1])

    def reverse(self, t: float) -> float:
        """inf{τ : ξ(τ) > t}, for t strictly between the first and last level."""
        lo, hi = self.value_range()
        if not lo < t < hi:
            raise RangeError("value outside the range", t, lo, hi)
        i = int(np.searchsorted(self.levels, t, side="right"))
        return float(self.breaks[i - 1])


# ---------------------------------------------------------------------------
# lattices


def _exponent(v: Any) -> Any:
    return parse_number(v, "exponent") if isinstance(v, str) else v


class PowerLogLattice(BaseModel):
    """‖h‖_F = ‖u^{-θ} (1+|log u|)^γ h(u)‖_{L_q(du/u)}."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    q: float = Field(..., description="1 <= q <= inf")
    theta: float
    gamma: float = 0.0

    @field_validator("q", "theta", "gamma", mode="before")
    @classmethod
    def _parse(cls, v: Any) -> Any:
        return _exponent(v)

    @field_validator("q")
    @classmethod
    def _q_range(cls, v: float) -> float:
        if not v >= 1:
            raise ValueError("q must lie in [1, inf]")
        return v

    @model_validator(mode="after")
    def _xi_finite(self) -> "PowerLogLattice":
        q, th, g = self.q, self.theta, self.gamma
        gq = g if math.isinf(q) else g * q
        strict = not math.isinf(q)
        zero_ok = th < 1 or (th == 1 and (gq < -1 if strict else gq <= 0))
        inf_ok = th > 0 or (th == 0 and (gq < -1 if strict else gq <= 0))
        if not (zero_ok and inf_ok):
            raise ValueError(f"Ξ(1) = ‖min(1,·)‖_F is infinite for q={q}, theta={th}, gamma={g}")
        return self

    def literal(self) -> str:
        q = "inf" if math.isinf(self.q) else repr(self.q)
        return f"F(q={q},theta={self.theta!r},gamma={self.gamma!r})"

    def __str__(self) -> str:
        return self.literal()

    @property
    def interior(self) -> bool:
        return 0 < self.theta < 1


def parse_lattice(text: Any) -> PowerLogLattice:
    if isinstance(text, PowerLogLattice):
        return text
    if isinstance(text, dict):
        return PowerLogLattice.model_validate(text)
    name, args = parse_call(str(text))
    if name != "F":
        raise InputError(f"lattice literal must be F(...), got {name!r}")
    unknown = set(args) - {"q", "theta", "gamma"}
    if unknown:
        raise InputError(f"unknown lattice argument(s) {sorted(unknown)}")
    try:
        return PowerLogLattice(**args)
    except ValueError as e:
        msg = e.errors()[0]["msg"] if hasattr(e, "errors") else str(e)
        raise InputError(f"invalid lattice {text!r}: {msg}") from e


def _limit_at(beta: float, gamma: float, end: str) -> float:
    """lim u^beta (1+|log u|)^gamma at 0 or inf."""
    s = -beta if end == "zero" else beta
    if s > 0 or (s == 0 and gamma > 0):
        return math.inf
    if s < 0 or gamma < 0:
        return 0.0
    return 1.0


def _sup_power_log(beta: float, gamma: float, a: float, b: float) -> float:
    """sup over [a, b] of u^beta (1+|log u|)^gamma, endpoints possibly 0 / inf."""
    cands = []
    for end, x in (("zero", a), ("inf", b)):
        if (end == "zero" and x == 0) or (end == "inf" and math.isinf(x)):
            cands.append(_limit_at(beta, gamma, end))
        else:
            cands.append(x ** beta * (1 + abs(math.log(x))) ** gamma)
    xs = [0.0]
    if beta != 0 and gamma != 0:
        xs += [-gamma / beta - 1, 1 - gamma / beta]
    la = -math.inf if a == 0 else math.log(a)
    lb = math.inf if math.isinf(b) else math.log(b)
    for x in xs:
        if la < x < lb:
            cands.append(math.exp(beta * x) * (1 + abs(x)) ** gamma)
    return max(cands)


def lattice_norm(F: PowerLogLattice, h: Profile, window: Optional[tuple[float, float]] = None) -> float:
    """‖h χ_window‖_F; closed form when γ = 0, otherwise quadrature of the power-log pieces."""
    pcs = _pieces(h)
    a, b = window if window is not None else (0.0, math.inf)
    if not b > a:
        return 0.0
    lows, ups = pcs.knots, pcs.upper
    sv = None if F.gamma == 0 else SlowlyVarying.log_power(F.gamma)
    total = 0.0
    for i in range(lows.size):
        lo, hi = max(a, float(lows[i])), min(b, float(ups[i]))
        c = float(pcs.coef[i])
        if not hi > lo or c == 0:
            continue
        beta = float(pcs.expo[i]) - F.theta
        if math.isinf(F.q):
            total = max(total, abs(c) * _sup_power_log(beta, F.gamma, lo, hi))
            continue
        p = beta * F.q - 1.0
        if sv is None:
            piece = float(power_integral(lo, hi, p))
        else:
            piece = float(PowerSVWeight(alpha=p, sv=sv, power=F.q).integral(lo, hi))
        total += abs(c) ** F.q * piece
        if math.isinf(total):
            return math.inf
    if math.isinf(F.q) or math.isinf(total):
        return total
    return total ** (1.0 / F.q)


# ---------------------------------------------------------------------------
# fundamental functions and reverse functions


def _xi_constant(F: PowerLogLattice) -> Optional[float]:
    """C with Ξ(t) = C t^{1-θ} when γ = 0 and 0 < θ < 1."""
    if F.gamma != 0 or not F.interior:
        return None
    if math.isinf(F.q):
        return 1.0
    return (1.0 / ((1 - F.theta) * F.q) + 1.0 / (F.theta * F.q)) ** (1.0 / F.q)


def fundamental_Xi(F: PowerLogLattice, t) -> np.ndarray | float:
    """Ξ(t) = ‖min(·, t)‖_F."""
    c = _xi_constant(F)
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("Ξ is defined for t > 0", quantity="t")
    if c is not None:
        out = c * arr ** (1 - F.theta)
    else:
        out = np.array([lattice_norm(F, PowerPieces.min_identity(float(s))) for s in arr.ravel()]).reshape(arr.shape)
    return float(out) if np.ndim(out) == 0 else out


def fundamental_Theta(F: PowerLogLattice, t) -> np.ndarray | float:
    """Θ(t) = t / Ξ(t)."""
    arr = np.asarray(t, dtype=float)
    out = arr / np.asarray(fundamental_Xi(F, arr))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MonotoneFunction:
    """Continuous non-decreasing ξ on (0, inf) with an optional closed-form inverse."""

    fn: Callable[[float], float]
    inverse: Optional[Callable[[float], float]] = None
    lo: float = math.exp(-4 * LOG_WINDOW)
    hi: float = math.exp(4 * LOG_WINDOW)
    heuristic_range: bool = False

    def __call__(self, tau) -> float:
        return self.fn(tau)

    def value_range(self) -> tuple[float, float]:
        return float(self.fn(self.lo)), float(self.fn(self.hi))


def xi_function(F: PowerLogLattice) -> MonotoneFunction:
    c = _xi_constant(F)
    if c is not None:
        e = 1 - F.theta
        return MonotoneFunction(lambda s: c * s ** e, lambda t: (t / c) ** (1 / e))
    return MonotoneFunction(lambda s: float(fundamental_Xi(F, s)), heuristic_range=True)


def theta_function(F: PowerLogLattice) -> MonotoneFunction:
    c = _xi_constant(F)
    if c is not None:
        th = F.theta
        return MonotoneFunction(lambda s: s ** th / c, lambda t: (t * c) ** (1 / th))
    return MonotoneFunction(lambda s: float(fundamental_Theta(F, s)), heuristic_range=True)


def generalized_reverse(xi: Union[MonotoneFunction, StepMonotone, Callable[[float], float]], t: float,
                        domain: Optional[tuple[float, float]] = None) -> float:
    """Rξ(t) = inf{τ : ξ(τ) > t}; range errors outside (ξ(a+), ξ(b-))."""
    if isinstance(xi, StepMonotone):
        return xi.reverse(t)
    if not isinstance(xi, MonotoneFunction):
        lo, hi = domain or (math.exp(-4 * LOG_WINDOW), math.exp(4 * LOG_WINDOW))
        xi = MonotoneFunction(xi, lo=lo, hi=hi, heuristic_range=True)
    if xi.inverse is not None:
        if not t > 0 or math.isinf(t):
            raise RangeError("value outside the range", t, 0.0, math.inf)
        return float(xi.inverse(t))
    a, b = xi.value_range()
    if not a < t < b:
        raise RangeError("value outside the range", t, a, b)
    lo, hi = math.log(xi.lo), math.log(xi.hi)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if xi.fn(math.exp(mid)) > t:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    return math.exp(hi)


# ---------------------------------------------------------------------------
# two-term Holmstedt-type expressions


def holmstedt_A_rhs(K: Profile, F0: PowerLogLattice, t: float) -> float:
    """‖K χ_(0,φ)‖_F0 + K(φ) ‖χ_(φ,∞)‖_F0 with φ = R_Ξ(t) for Ξ of F0."""
    phi = generalized_reverse(xi_function(F0), t)
    pcs = _pieces(K)
    head = lattice_norm(F0, pcs, (0.0, phi))
    k_phi = float(pcs(phi))
    if k_phi == 0:
        return head
    return head + k_phi * lattice_norm(F0, PowerPieces.power(1.0, 0.0), (phi, math.inf))


def holmstedt_B_rhs(K: Profile, F1: PowerLogLattice, t: float) -> float:
    """t (K(ψ)/ψ) ‖s χ_(0,ψ)‖_F1 + t ‖K χ_(ψ,∞)‖_F1 with ψ = R_Θ(t) for Θ of F1."""
    psi = generalized_reverse(theta_function(F1), t)
    pcs = _pieces(K)
    k_psi = float(pcs(psi))
    first = 0.0 if k_psi == 0 else t * (k_psi / psi) * lattice_norm(F1, PowerPieces.power(1.0, 1.0), (0.0, psi))
    return first + t * lattice_norm(F1, pcs, (psi, math.inf))


ulyanov_profile_rhs = holmstedt_A_rhs
marchaud_profile_rhs = holmstedt_B_rhs
reverse_marchaud_profile_lhs = holmstedt_B_rhs


class ProfilePair(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    lhs: float
    rhs: float


def kolyada_profile_pair(K_Z: Profile, K_X: Profile, F0: PowerLogLattice, F1: PowerLogLattice, t: float) -> ProfilePair:
    """lhs: (A2)-shape on K_Z with ψ from Θ_F1; rhs: (A1)-shape on K_X with φ from Ξ_F0."""
    return ProfilePair(t=t, lhs=holmstedt_B_rhs(K_Z, F1, t), rhs=holmstedt_A_rhs(K_X, F0, t))


def random_quasiconcave(rng: np.random.Generator, t: np.ndarray) -> QuasiconcaveProfile:
    """Seeded random quasiconcave profile on the grid t (for property checks)."""
    slopes = rng.uniform(0.0, 1.0, size=t.size)
    logk = np.cumsum(slopes * np.diff(np.log(t), prepend=math.log(t[0])))
    return QuasiconcaveProfile.from_measurements(t, rng.uniform(0.5, 2.0) * np.exp(logk))
