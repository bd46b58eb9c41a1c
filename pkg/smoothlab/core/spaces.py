"""
Rearrangement-invariant norms over exact step profiles: Lebesgue, Lorentz, Lorentz-Karamata,
the weighted Lambda/Gamma/S cones and S_X(w); fundamental functions, a Boyd-type audit and
Besov seminorms from measured moduli.

+inf is a legal norm value. Literals: "Lorentz(p=2,r=1)", "LK(p=2,r=2,b=log^0.5)",
"Lambda(r=2,w=t^0.0*log^1)", "SGage(base=L(p=2),v=t^0.25)".
"""
from __future__ import annotations

import math
from typing import Annotated, Any, Callable, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationInfo, field_validator, model_validator

from smoothlab.core.gridfn import (
    DecreasingProfile,
    GridFunction,
    PiecewiseProfile,
    profile_from_samples,
    profile_integral,
    profile_sup,
    rearrange,
)
from smoothlab.core.literals import parse_call, parse_number, parse_sv, parse_weight
from smoothlab.core.quadrature import log_grid
from smoothlab.core.weights import PowerSVWeight, SlowlyVarying, TabulatedWeight
from smoothlab.observability.logging import get_logger
from smoothlab.observability.metrics import record_norm_evaluation
from smoothlab.shared.env_helpers import get_int_env
from smoothlab.shared.errors import DomainError, InputError

logger = get_logger(__name__)

GAGE_SAMPLES_PER_DECADE = get_int_env("SMOOTHLAB_GAGE_SAMPLES_PER_DECADE", default=64)
GAGE_DECADES = 6


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def _exponent(v: Any) -> Any:
    return parse_number(v, "exponent") if isinstance(v, str) else v


def _check_range(v: float, name: str) -> float:
    if not (v >= 1):
        raise ValueError(f"{name} must lie in [1, inf]")
    return v


class _Space(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def literal(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def profile_norm(self, g: DecreasingProfile) -> float:  # pragma: no cover - overridden
        raise NotImplementedError

    def __str__(self) -> str:
        return self.literal()


def _power_norm(pw: PiecewiseProfile, r: float, weight: Any) -> float:
    total = profile_integral(pw, r, weight)
    return math.inf if math.isinf(total) else total ** (1.0 / r)


def _sup_with(pw: PiecewiseProfile, factor: Optional[Callable], powers) -> float:
    return profile_sup(pw, factor=factor, factor_powers=powers)


class Lebesgue(_Space):
    kind: Literal["lebesgue"] = "lebesgue"
    p: float

    @field_validator("p", mode="before")
    @classmethod
    def _parse(cls, v: Any) -> Any:
        return _exponent(v)

    @field_validator("p")
    @classmethod
    def _range(cls, v: float) -> float:
        return _check_range(v, "p")

    def literal(self) -> str:
        return f"Lebesgue(p={_fmt(self.p)})"

    def profile_norm(self, g: DecreasingProfile) -> float:
        pw = g.to_piecewise()
        if math.isinf(self.p):
            return _sup_with(pw, None, ((0.0, 0.0), (0.0, 0.0)))
        return _power_norm(pw, self.p, None)


class Lorentz(_Space):
    kind: Literal["lorentz"] = "lorentz"
    p: float
    r: float

    @field_validator("p", "r", mode="before")
    @classmethod
    def _parse(cls, v: Any) -> Any:
        return _exponent(v)

    @field_validator("p", "r")
    @classmethod
    def _range(cls, v: float, info: ValidationInfo) -> float:
        return _check_range(v, info.field_name)

    def literal(self) -> str:
        return f"Lorentz(p={_fmt(self.p)},r={_fmt(self.r)})"

    def profile_norm(self, g: DecreasingProfile) -> float:
        pw = g.to_piecewise()
        inv_p = 0.0 if math.isinf(self.p) else 1.0 / self.p
        if math.isinf(self.r):
            factor = (lambda t: np.asarray(t) ** inv_p) if inv_p else None
            return _sup_with(pw, factor, ((inv_p, 0.0), (inv_p, 0.0)))
        return _power_norm(pw, self.r, PowerSVWeight(alpha=self.r * inv_p - 1.0))


class LorentzKaramata(_Space):
    kind: Literal["lk"] = "lk"
    p: float
    r: float
    b: SlowlyVarying

    @field_validator("p", "r", mode="before")
    @classmethod
    def _parse(cls, v: Any) -> Any:
        return _exponent(v)

    @field_validator("p", "r")
    @classmethod
    def _range(cls, v: float, info: ValidationInfo) -> float:
        return _check_range(v, info.field_name)

    @field_validator("b", mode="before")
    @classmethod
    def _b(cls, v: Any) -> Any:
        return parse_sv(v) if isinstance(v, (str, list)) else v

    def literal(self) -> str:
        return f"LK(p={_fmt(self.p)},r={_fmt(self.r)},b={self.b.literal()})"

    def profile_norm(self, g: DecreasingProfile) -> float:
        pw = g.to_piecewise()
        inv_p = 0.0 if math.isinf(self.p) else 1.0 / self.p
        if math.isinf(self.r):
            # r = inf reading: sup_t t^{1/p} b(t) f*(t)
            b = self.b
            powers = ((inv_p, b.end_gamma("zero")), (inv_p, b.end_gamma("inf")))
            return _sup_with(pw, lambda t: np.asarray(t) ** inv_p * b(t), powers)
        w = PowerSVWeight(alpha=self.r * inv_p - 1.0, sv=self.b, power=self.r)
        return _power_norm(pw, self.r, w)


class _WeightedCone(_Space):
    r: float
    w: Union[PowerSVWeight, TabulatedWeight]

    @field_validator("r", mode="before")
    @classmethod
    def _parse(cls, v: Any) -> Any:
        return _exponent(v)

    @field_validator("r")
    @classmethod
    def _range(cls, v: float) -> float:
        return _check_range(v, "r")

    @field_validator("w", mode="before")
    @classmethod
    def _w(cls, v: Any) -> Any:
        return parse_weight(v) if isinstance(v, str) else v

    @model_validator(mode="after")
    def _local_integrability(self) -> "_WeightedCone":
        if not self.w.head_integrable():
            raise ValueError(f"∫_0^1 w must be finite for {self.kind} (w = {self.w.literal()})")
        return self

    def _name(self) -> str:
        raise NotImplementedError

    def literal(self) -> str:
        return f"{self._name()}(r={_fmt(self.r)},w={self.w.literal()})"

    def _integrand(self, pw: PiecewiseProfile) -> PiecewiseProfile:
        raise NotImplementedError

    def profile_norm(self, g: DecreasingProfile) -> float:
        h = self._integrand(g.to_piecewise())
        if math.isinf(self.r):
            # r = inf reading: sup_t h(t) W(t) with W(t) = ∫_0^t w
            a0, l0 = self.w.end_behaviour("zero")
            ai, li = self.w.end_behaviour("inf")
            inf_pow = (0.0, 0.0) if self.w.tail_integrable() else (ai + 1.0, li)
            return _sup_with(h, lambda t: np.asarray(self.w.cumulative(np.asarray(t, float))),
                             ((a0 + 1.0, l0), inf_pow))
        return _power_norm(h, self.r, self.w)


class Lambda(_WeightedCone):
    kind: Literal["lambda"] = "lambda"

    @model_validator(mode="after")
    def _normable(self) -> "Lambda":
        if math.isfinite(self.r) and not self.w.tail_integrable(-self.r):
            raise ValueError(f"degenerate weight for Lambda: ∫_t^∞ s^-r w diverges (w = {self.w.literal()})")
        return self

    def _name(self) -> str:
        return "Lambda"

    def _integrand(self, pw: PiecewiseProfile) -> PiecewiseProfile:
        return pw


class Gamma(_WeightedCone):
    kind: Literal["gamma"] = "gamma"

    def _name(self) -> str:
        return "Gamma"

    def _integrand(self, pw: PiecewiseProfile) -> PiecewiseProfile:
        return pw.double_star()


class Scone(_WeightedCone):
    kind: Literal["scone"] = "scone"

    def _name(self) -> str:
        return "Scone"

    def _integrand(self, pw: PiecewiseProfile) -> PiecewiseProfile:
        last = pw.pieces - 1
        if pw.a[last] or pw.b[last] or pw.c[last] or pw.d[last]:
            raise DomainError("S_r(w) needs f*(inf) = 0", quantity="f*")
        return pw.oscillation()


class SGage(_Space):
    """‖(f** - f*) v‖ in the representation of `base`, by rearranging sampled integrands."""

    kind: Literal["sgage"] = "sgage"
    base: Any
    v: PowerSVWeight

    @field_validator("base", mode="before")
    @classmethod
    def _base(cls, v: Any) -> Any:
        if isinstance(v, _Space):
            return v
        if isinstance(v, str):
            return parse_space(v)
        if isinstance(v, dict):
            return space_adapter().validate_python(v)
        raise ValueError("base must be a space literal or mapping")

    @field_validator("v", mode="before")
    @classmethod
    def _v(cls, v: Any) -> Any:
        return parse_weight(v) if isinstance(v, str) else v

    def literal(self) -> str:
        return f"SGage(base={self.base.literal()},v={self.v.literal()})"

    def profile_norm(self, g: DecreasingProfile) -> float:
        pw = g.to_piecewise()
        osc = pw.oscillation()
        if not np.any(pw.a):
            return 0.0
        values, measures = sample_integrand(osc, self.v, pw.knots)
        return representation_norm(self.base, values, measures)


SpaceSpec = Annotated[
    Union[Lebesgue, Lorentz, LorentzKaramata, Lambda, Gamma, Scone, SGage],
    Field(discriminator="kind"),
]

_ADAPTER: Optional[TypeAdapter] = None


def space_adapter() -> TypeAdapter:
    global _ADAPTER  # noqa: PLW0603
    if _ADAPTER is None:
        _ADAPTER = TypeAdapter(SpaceSpec)
    return _ADAPTER


_NAMES = {
    "lebesgue": (Lebesgue, ("p",)),
    "l": (Lebesgue, ("p",)),
    "lorentz": (Lorentz, ("p", "r")),
    "lk": (LorentzKaramata, ("p", "r", "b")),
    "lorentzkaramata": (LorentzKaramata, ("p", "r", "b")),
    "lambda": (Lambda, ("r", "w")),
    "gamma": (Gamma, ("r", "w")),
    "scone": (Scone, ("r", "w")),
    "s": (Scone, ("r", "w")),
    "sgage": (SGage, ("base", "v")),
}


def parse_space(text: Any) -> _Space:
    """Space literal or mapping -> validated space model; errors surface as InputError."""
    if isinstance(text, _Space):
        return text
    try:
        if isinstance(text, dict):
            return space_adapter().validate_python(text)
        name, args = parse_call(str(text))
        entry = _NAMES.get(name.lower())
        if entry is None:
            raise InputError(f"unknown space {name!r}")
        cls, allowed = entry
        extra = set(args) - set(allowed)
        if extra:
            raise InputError(f"unknown argument(s) {sorted(extra)} for {name}")
        missing = [a for a in allowed if a not in args]
        if missing:
            raise InputError(f"missing argument(s) {missing} for {name}")
        return cls(**args)
    except InputError:
        raise
    except ValueError as e:
        # pydantic ValidationError is a ValueError; keep the first message only
        msg = e.errors()[0]["msg"] if hasattr(e, "errors") else str(e)
        raise InputError(f"invalid space {text!r}: {msg}") from e


def space_norm(spec: _Space, f: GridFunction) -> float:
    """Norm of f in `spec` via its exact rearrangement."""
    record_norm_evaluation(spec.kind)
    return spec.profile_norm(rearrange(f))


def profile_norm(spec: _Space, g: DecreasingProfile) -> float:
    return spec.profile_norm(g)


def representation_norm(spec: _Space, values: np.ndarray, measures: np.ndarray) -> float:
    """Norm of a (value, measure) simple function on (0, inf) in the representation of `spec`."""
    return spec.profile_norm(profile_from_samples(values, measures))


def sample_integrand(h: PiecewiseProfile, v: Callable[[np.ndarray], np.ndarray], knots: np.ndarray,
                     per_decade: Optional[int] = None,
                     window: Optional[tuple[float, float]] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Midpoint samples of h(t) v(t) on a log grid through the knots, with interval lengths as
    measures. Covers GAGE_DECADES decades beyond the outermost knots, clipped to `window`.
    """
    per_decade = per_decade or GAGE_SAMPLES_PER_DECADE
    inner = knots[knots > 0]
    lo = (inner[0] if inner.size else 1.0) * 10.0 ** -GAGE_DECADES
    hi = (inner[-1] if inner.size else 1.0) * 10.0 ** GAGE_DECADES
    cuts = [inner]
    if window is not None:
        wlo, whi = window
        if wlo > 0:
            lo = max(lo, min(wlo, hi))
            cuts.append(np.array([wlo]))
        if math.isfinite(whi):
            hi = min(hi, whi)
            cuts.append(np.array([whi]))
    if not hi > lo:
        return np.zeros(0), np.zeros(0)
    edges = np.unique(np.concatenate((log_grid(lo, hi, per_decade), *cuts)))
    edges = edges[(edges >= lo) & (edges <= hi)]
    if edges.size < 2:
        return np.zeros(0), np.zeros(0)
    mids = np.sqrt(edges[:-1] * edges[1:])
    values = np.abs(np.asarray(h(mids))) * np.asarray(v(mids))
    return values, np.diff(edges)


def fundamental_function(spec: _Space, t) -> np.ndarray | float:
    """φ_X(t) = ‖χ_(0,t)‖_X."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([spec.profile_norm(DecreasingProfile([0.0, s], [1.0, 0.0])) for s in ts])
    return out if np.ndim(t) else float(out[0])


class BoydAudit(BaseModel):
    """Grid-estimated dilation indices of a space from log-slopes of its fundamental function."""

    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float
    inside_unit_interval: bool
    heuristic: bool = True


def boyd_audit(spec: _Space, lo: float = 1e-4, hi: float = 1e4, per_decade: int = 4) -> BoydAudit:
    g = log_grid(lo, hi, per_decade)
    phi = fundamental_function(spec, g)
    if not np.all(np.isfinite(phi)) or np.any(phi <= 0):
        logger.warning("boyd_audit_degenerate", space=spec.literal())
        return BoydAudit(lower=math.nan, upper=math.nan, inside_unit_interval=False)
    slopes = np.diff(np.log(phi)) / np.diff(np.log(g))
    lower, upper = float(np.min(slopes)), float(np.max(slopes))
    return BoydAudit(lower=lower, upper=upper, inside_unit_interval=bool(0 < lower <= upper < 1))


# ---------------------------------------------------------------------------
# Besov seminorms from measured moduli


def _b_reflected(b: SlowlyVarying) -> Callable[[np.ndarray], np.ndarray]:
    return lambda u: b(1.0 / np.asarray(u, dtype=float))


def besov_seminorm(f: GridFunction, spec: _Space, sigma: float, b: SlowlyVarying, s: float,
                   kappa: float, tgrid: np.ndarray, mode: str = "axis", dir_samples: Optional[int] = None) -> float:
    """‖u^{-σ} b(1/u) ω_{κ+σ}(f, u)_X‖_{L_s(du/u)} over (0, max tgrid]."""
    from smoothlab.core.smoothness import modulus_curve

    if not sigma > 0:
        raise InputError("σ must be positive")
    tg = np.asarray(tgrid, dtype=float)
    if tg.size == 0:
        raise InputError("empty t-grid")
    curve = modulus_curve(f, kappa + sigma, spec, u_max=float(tg.max()), mode=mode, dir_samples=dir_samples)
    return curve.head(float(tg.max()), -sigma, s, factor=_b_reflected(b),
                      factor_log_power_zero=b.end_gamma("inf"))


class BesovSplit(BaseModel):
    """Head integral over (0, δ) plus a bound for the (δ, u_max) part."""

    model_config = ConfigDict(frozen=True)

    delta: float
    head: float
    tail_bound: float
    tail_shape: float = Field(..., description="‖f‖ δ^-σ b(1/δ)")


def besov_split(f: GridFunction, spec: _Space, sigma: float, b: SlowlyVarying, s: float, kappa: float,
                delta: float, u_max: float = 1.0, mode: str = "axis") -> BesovSplit:
    """
    Split of the Besov integral at δ: exact head from the measured modulus and the tail bound
    ω ≤ Σ|binom(κ+σ, ν)| ‖f‖_X integrated against u^{-σ s} b(1/u)^s du/u on (δ, u_max).
    """
    from smoothlab.core.quadrature import quad_log
    from smoothlab.core.smoothness import binom_abs_sum, modulus_curve

    if not 0 < delta < u_max:
        raise InputError("need 0 < δ < u_max")
    curve = modulus_curve(f, kappa + sigma, spec, u_max=delta, mode=mode)
    refl = _b_reflected(b)
    head = curve.head(delta, -sigma, s, factor=refl,
                      factor_log_power_zero=b.end_gamma("inf"))
    norm = space_norm(spec, f)
    amp = binom_abs_sum(kappa + sigma) * norm
    if math.isinf(s):
        g = log_grid(delta, u_max, 32)
        tail_int = float(np.max(g ** (-sigma) * refl(g)))
    else:
        tail_int = quad_log(lambda u: (u ** (-sigma) * float(refl(u))) ** s / u, delta, u_max,
                            breakpoints=(1.0,)) ** (1.0 / s)
    return BesovSplit(delta=delta, head=head, tail_bound=amp * tail_int,
                      tail_shape=norm * delta ** (-sigma) * float(refl(delta)))
