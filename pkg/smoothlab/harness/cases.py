"""
Inequality cases: parameter records, hypothesis checks and the two sides of every inequality
as functions of t, computed from measured modulus curves or K-profiles.

Each case lists its hypotheses as data; run_case refuses a case with violations unless it is
run as a probe.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional, Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from smoothlab.core.gridfn import GridFunction
from smoothlab.core.interp import (
    PowerLogLattice,
    QuasiconcaveProfile,
    holmstedt_A_rhs,
    holmstedt_B_rhs,
    lattice_norm,
    parse_lattice,
)
from smoothlab.core.literals import parse_number, parse_sv, parse_weight
from smoothlab.core.smoothness import ModulusCurve, derivative_seminorm, k_upper, steklov_candidate
from smoothlab.core.spaces import Gamma, Lambda, Lebesgue, Lorentz, LorentzKaramata, parse_space
from smoothlab.core.weights import (
    associate_weight_bar,
    bn_transform,
    check_Br,
    check_Brstar,
    second_associate_nu,
    sv_product,
)
from smoothlab.shared.errors import DomainError, InputError, LabError, PreconditionError

INTEGER_SLACK = 1e-12


class CaseId(str, enum.Enum):
    MARCHAUD_CLASSIC = "MARCHAUD_CLASSIC"
    TIMAN = "TIMAN"
    REVERSE_MARCHAUD = "REVERSE_MARCHAUD"
    ULYANOV_CLASSIC = "ULYANOV_CLASSIC"
    ULYANOV_STRENGTHENED = "ULYANOV_STRENGTHENED"
    KOLYADA = "KOLYADA"
    SHARP_ULYANOV = "SHARP_ULYANOV"
    PROP11A = "PROP11A"
    PROP11B = "PROP11B"
    PROP13A = "PROP13A"
    PROP13B = "PROP13B"
    PROP13PRIME_A = "PROP13PRIME_A"
    PROP13PRIME_B = "PROP13PRIME_B"
    KOLULY = "KOLULY"
    ULYKOL = "ULYKOL"
    COR59 = "COR59"
    COR510 = "COR510"
    THM68 = "THM68"
    HOLMSTEDT_PROFILE = "HOLMSTEDT_PROFILE"
    TRIVIAL_BOUND = "TRIVIAL_BOUND"
    MODULUS_K_SANDWICH = "MODULUS_K_SANDWICH"


class HypothesisViolationError(LabError):
    """A case was asked to run outside its stated hypotheses."""

    def __init__(self, case_id: str, violations: list[str]):
        self.case_id = case_id
        self.violations = violations
        super().__init__(f"{case_id}: " + "; ".join(violations))


class EmptyFamilyError(LabError):
    """A case was asked to run over a family with no members."""


def _num(v: Any) -> Any:
    return parse_number(v, "parameter") if isinstance(v, str) else v


class CaseParams(BaseModel):
    """Every parameter any case uses; each case reads the ones it needs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: Optional[int] = None
    k: Optional[int] = None
    m: Optional[int] = None
    p: Optional[float] = None
    p_star: Optional[float] = None
    q: Optional[float] = None
    r: Optional[float] = None
    r_bar: Optional[float] = None
    r0: Optional[float] = None
    r1: Optional[float] = None
    q0: Optional[float] = None
    q1: Optional[float] = None
    s: Optional[float] = None
    delta: Optional[float] = None
    beta: Optional[float] = None
    sigma: Optional[float] = None
    gamma: Optional[float] = None
    kappa: Optional[float] = None
    b: Optional[str] = None
    B: Optional[str] = None
    w: Optional[str] = None
    space: Optional[str] = None
    lattice: Optional[str] = None
    form: Optional[Literal["A1", "A2"]] = None

    @field_validator("p", "p_star", "q", "r", "r_bar", "r0", "r1", "q0", "q1", "s", "delta", "beta",
                     "sigma", "gamma", "kappa", mode="before")
    @classmethod
    def _parse(cls, v: Any) -> Any:
        return _num(v)

    @field_validator("b", "B", "w", "space", "lattice", mode="before")
    @classmethod
    def _text(cls, v: Any) -> Any:
        return v if v is None or isinstance(v, str) else str(v)

    def public(self) -> dict[str, Any]:
        """Set fields only; infinities as "inf" (JSON-safe)."""
        out = {}
        for key, val in self.model_dump(exclude_none=True).items():
            out[key] = "inf" if isinstance(val, float) and math.isinf(val) else val
        return out


# ---------------------------------------------------------------------------
# hypothesis helpers


def _missing(params: CaseParams, names: tuple[str, ...]) -> list[str]:
    return [f"missing parameter {n}" for n in names if getattr(params, n) is None]


def _is_int(x: float) -> bool:
    return abs(x - round(x)) < INTEGER_SLACK


def sobolev_exponent(p: float, delta: float, n: int) -> float:
    """p* with 1/p* = 1/p - δ/n (inf when the right side is 0)."""
    inv = 1.0 / p - delta / n
    return math.inf if inv == 0 else 1.0 / inv


def _p_star_rule(params: CaseParams, delta: float, out: list[str]) -> None:
    p, n = params.p, params.n
    if params.p_star is None or p is None or n is None:
        return
    expected = sobolev_exponent(p, delta, n)
    if not math.isclose(params.p_star, expected, rel_tol=1e-9):
        out.append(f"p* = {params.p_star} but 1/p - δ/n gives {expected}")


def p_star_of(params: CaseParams, delta: Optional[float] = None) -> float:
    if params.p_star is not None:
        return params.p_star
    return sobolev_exponent(params.p, params.delta if delta is None else delta, params.n)


def _positive(params: CaseParams, names: tuple[str, ...], out: list[str]) -> None:
    for n in names:
        v = getattr(params, n)
        if v is not None and not v > 0:
            out.append(f"{n} must be positive (got {v})")


def _at_least_one(params: CaseParams, names: tuple[str, ...], out: list[str]) -> None:
    for n in names:
        v = getattr(params, n)
        if v is not None and not v >= 1:
            out.append(f"{n} must lie in [1, inf] (got {v})")


def _open_p(params: CaseParams, out: list[str]) -> None:
    if params.p is not None and not 1 < params.p < math.inf:
        out.append(f"need 1 < p < inf (got {params.p})")


def _delta_rule(params: CaseParams, out: list[str]) -> None:
    if None in (params.delta, params.p, params.n):
        return
    if not 0 < params.delta < params.n / params.p:
        out.append(f"need 0 < δ < n/p = {params.n / params.p} (got δ = {params.delta})")


def _integers(params: CaseParams, names: tuple[str, ...], out: list[str]) -> None:
    for n in names:
        v = getattr(params, n)
        if v is not None and v < 1:
            out.append(f"{n} must be a positive integer (got {v})")


# ---------------------------------------------------------------------------
# per-case hypotheses


def _v_marchaud(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "m", "p"))
    _integers(params, ("k", "m"), out)
    _at_least_one(params, ("p",), out)
    return out


def _v_timan(params: CaseParams) -> list[str]:
    out = _v_marchaud(params)
    _open_p(params, out)
    if params.p is not None and params.q is not None and params.q != min(2.0, params.p):
        out.append(f"q must equal min(2, p) = {min(2.0, params.p)} (got {params.q})")
    return out


def _v_reverse_marchaud(params: CaseParams) -> list[str]:
    out = _v_marchaud(params)
    _open_p(params, out)
    if params.p is not None and params.r is not None and params.r != max(2.0, params.p):
        out.append(f"r must equal max(2, p) = {max(2.0, params.p)} (got {params.r})")
    return out


def _v_ulyanov(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "p", "delta"))
    _integers(params, ("k",), out)
    if params.p is not None and not 1 <= params.p < math.inf:
        out.append(f"need 1 <= p < inf (got {params.p})")
    _delta_rule(params, out)
    if params.delta is not None:
        _p_star_rule(params, params.delta, out)
    return out


def _v_ulyanov_strengthened(params: CaseParams) -> list[str]:
    out = _v_ulyanov(params)
    if None not in (params.k, params.p, params.delta, params.n):
        if not 0 < params.delta < params.k < params.n / params.p:
            out.append(f"need 0 < δ < k < n/p = {params.n / params.p} (got δ = {params.delta}, k = {params.k})")
    return out


def _v_kolyada(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "p", "delta"))
    _integers(params, ("k",), out)
    p, n = params.p, params.n
    if p is not None and not ((1 < p < math.inf) or (p == 1 and n is not None and n >= 2)):
        out.append("need 1 < p < inf, or p = 1 with n >= 2")
    if None not in (params.delta, p, n, params.k) and not 0 < params.delta < min(n / p, params.k):
        out.append(f"need 0 < δ < min(n/p, k) = {min(n / p, params.k)}")
    if params.delta is not None:
        _p_star_rule(params, params.delta, out)
    return out


def _v_sharp_ulyanov(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "p", "delta"))
    _integers(params, ("k",), out)
    _open_p(params, out)
    _delta_rule(params, out)
    if params.delta is not None:
        _p_star_rule(params, params.delta, out)
    return out


def _q0_rule(p: float, r0: float, r1: float, q0: float) -> Optional[str]:
    if p != 2:
        bound = min(p, 2.0, r1)
        return None if q0 <= bound else f"need q0 <= min(p, 2, r1) = {bound} (got {q0})"
    if r0 <= 2:
        bound = min(2.0, r1)
        return None if q0 <= bound else f"p = 2, r0 <= 2: need q0 <= min(2, r1) = {bound} (got {q0})"
    if not (q0 < 2 and q0 <= r1):
        return f"p = 2, r0 > 2: need q0 < 2 (and q0 <= r1) (got {q0})"
    return None


def _q1_rule(p: float, r0: float, r1: float, q1: float) -> Optional[str]:
    if p != 2:
        bound = max(p, 2.0, r0)
        return None if q1 >= bound else f"need q1 >= max(p, 2, r0) = {bound} (got {q1})"
    if r1 >= 2:
        bound = max(2.0, r0)
        return None if q1 >= bound else f"p = 2, r1 >= 2: need q1 >= max(2, r0) = {bound} (got {q1})"
    if not (q1 > 2 and q1 >= r0):
        return f"p = 2, r1 < 2: need q1 > 2 (and q1 >= r0) (got {q1})"
    return None


def _v_prop11(params: CaseParams) -> list[str]:
    out = _missing(params, ("p", "r0", "r1", "beta"))
    _open_p(params, out)
    _at_least_one(params, ("r0", "r1", "q0", "q1"), out)
    _positive(params, ("beta",), out)
    if params.r0 is not None and params.r1 is not None and not params.r0 <= params.r1:
        out.append(f"need r0 <= r1 (got {params.r0} > {params.r1})")
    return out


def _v_prop11a(params: CaseParams) -> list[str]:
    out = _v_prop11(params) + _missing(params, ("sigma", "q0"))
    _positive(params, ("sigma",), out)
    if None not in (params.p, params.r0, params.r1, params.q0):
        msg = _q0_rule(params.p, params.r0, params.r1, params.q0)
        if msg:
            out.append(msg)
    return out


def _v_prop11b(params: CaseParams) -> list[str]:
    out = _v_prop11(params) + _missing(params, ("gamma", "q1"))
    _positive(params, ("gamma",), out)
    if None not in (params.p, params.r0, params.r1, params.q1):
        msg = _q1_rule(params.p, params.r0, params.r1, params.q1)
        if msg:
            out.append(msg)
    return out


def _v_prop13a(params: CaseParams) -> list[str]:
    out = _missing(params, ("p", "delta", "r0", "r1", "q1", "beta"))
    _open_p(params, out)
    _delta_rule(params, out)
    _at_least_one(params, ("r0", "r1", "q1"), out)
    _positive(params, ("beta",), out)
    if params.delta is not None:
        _p_star_rule(params, params.delta, out)
    r0, r1, q1 = params.r0, params.r1, params.q1
    if None not in (r0, r1) and not r0 <= r1:
        out.append(f"need r0 <= r1 (got {r0} > {r1})")
    if None not in (q1, r1) and not q1 <= r1:
        out.append(f"need q1 <= r1 (got {q1} > {r1})")
    return out


def _v_prop13b(params: CaseParams) -> list[str]:
    out = _missing(params, ("p", "delta", "r0", "r1", "q0", "q1", "beta"))
    _open_p(params, out)
    _delta_rule(params, out)
    _at_least_one(params, ("r0", "r1", "q0", "q1"), out)
    _positive(params, ("beta",), out)
    if params.delta is not None:
        _p_star_rule(params, params.delta, out)
    if None not in (params.r0, params.q0) and not params.r0 <= params.q0:
        out.append(f"need r0 <= q0 (got {params.r0} > {params.q0})")
    if None not in (params.q1, params.r1) and not params.q1 <= params.r1:
        out.append(f"need q1 <= r1 (got {params.q1} > {params.r1})")
    return out


def _v_prop13prime(params: CaseParams, with_q0: bool) -> list[str]:
    out = _missing(params, ("delta", "q1", "r1", "beta") + (("q0",) if with_q0 else ()))
    n, d = params.n, params.delta
    if params.p is not None and params.p != 1:
        out.append(f"this case is stated for p = 1 (got {params.p})")
    if n is not None and n < 2:
        out.append(f"need n >= 2 (got n = {n})")
    if None not in (n, d) and not 1 <= d < n:
        out.append(f"need 1 <= δ < n (got δ = {d})")
    _positive(params, ("beta",), out)
    _at_least_one(params, ("q1", "r1") + (("q0",) if with_q0 else ()), out)
    if None not in (params.q1, params.r1) and not params.q1 <= params.r1:
        out.append(f"need q1 <= r1 (got {params.q1} > {params.r1})")
    if None not in (params.beta, d) and not _is_int(params.beta + d):
        out.append(f"need β + δ to be an integer (got {params.beta + d})")
    if params.p_star is not None and None not in (n, d):
        expected = sobolev_exponent(1.0, d, n)
        if not math.isclose(params.p_star, expected, rel_tol=1e-9):
            out.append(f"p* = {params.p_star} but 1 - δ/n gives {expected}")
    return out


def _v_koluly(params: CaseParams) -> list[str]:
    out = _missing(params, ("p", "delta", "r", "beta"))
    _open_p(params, out)
    _delta_rule(params, out)
    _at_least_one(params, ("r",), out)
    _positive(params, ("beta",), out)
    if not out:
        ps = p_star_of(params)
        if not params.r <= min(ps, 2.0):
            out.append(f"need r <= min(p*, 2) = {min(ps, 2.0)} (got {params.r})")
    return out


def _v_ulykol(params: CaseParams) -> list[str]:
    out = _missing(params, ("p", "delta", "r", "beta", "gamma"))
    _open_p(params, out)
    _delta_rule(params, out)
    _at_least_one(params, ("r",), out)
    _positive(params, ("beta", "gamma"), out)
    if not out:
        ps = p_star_of(params)
        if not params.r >= max(ps, 2.0):
            out.append(f"need r >= max(p*, 2) = {max(ps, 2.0)} (got {params.r})")
    return out


def _v_cor59(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "m", "r", "w"))
    _integers(params, ("k", "m"), out)
    if None not in (params.k, params.m, params.n) and not params.k + params.m < params.n:
        out.append(f"need k + m < n (got {params.k} + {params.m} vs n = {params.n})")
    if params.r is not None and not 1 < params.r < math.inf:
        out.append(f"need 1 < r < inf (got {params.r})")
    if out:
        return out
    w = parse_weight(params.w)
    br = check_Br(w, params.r)
    if not br.holds:
        out.append(f"w is not in B_r ({br.reason or 'unbounded'})")
    star = params.r * (params.k + params.m - 1) / params.n
    bs = check_Brstar(w, star)
    if not bs.holds:
        out.append(f"w is not in B*_{star:g} ({bs.reason or 'unbounded'})")
    try:
        associate_weight_bar(w, params.m, params.n, params.r)
    except (PreconditionError, DomainError) as e:
        out.append(f"associate weight: {e}")
    return out


def _v_cor510(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "m", "p", "r", "r_bar", "b"))
    _integers(params, ("k", "m"), out)
    k, m, n, p = params.k, params.m, params.n, params.p
    if None not in (k, m, n) and not k + m < n:
        out.append(f"need k + m < n (got {k} + {m} vs n = {n})")
    if None not in (k, m, n, p):
        bound = math.inf if k + m - 1 == 0 else n / (k + m - 1)
        if not 1 < p < bound:
            out.append(f"need 1 < p < n/(k+m-1) = {bound} (got {p})")
    if None not in (params.r, params.r_bar) and not 1 < params.r_bar <= params.r < math.inf:
        out.append(f"need 1 < r_bar <= r < inf (got r_bar = {params.r_bar}, r = {params.r})")
    if params.b is not None:
        parse_sv(params.b)
    return out


def _v_thm68(params: CaseParams) -> list[str]:
    out = _missing(params, ("kappa", "p", "sigma", "r", "s", "b"))
    _positive(params, ("kappa",), out)
    _open_p(params, out)
    if None not in (params.sigma, params.p, params.n) and not 0 < params.sigma < params.n / params.p:
        out.append(f"need 0 < σ < n/p = {params.n / params.p} (got {params.sigma})")
    if None not in (params.r, params.s) and not 1 <= params.r <= params.s:
        out.append(f"need 1 <= r <= s (got r = {params.r}, s = {params.s})")
    if params.b is not None and not parse_sv(params.b).in_sv_up():
        out.append("b must be non-decreasing slowly varying (SV↑)")
    if not out and params.n is not None:
        try:
            sv_product(bn_transform(parse_sv(params.b), params.n), parse_sv(params.B or "1"))
        except PreconditionError as e:
            out.append(f"b_n·B: {e}")
    return out


def _v_holmstedt(params: CaseParams) -> list[str]:
    out = _missing(params, ("space", "k", "lattice", "form"))
    _integers(params, ("k",), out)
    if params.space is not None:
        parse_space(params.space)
    if params.lattice is not None:
        F = parse_lattice(params.lattice)
        if not F.interior:
            out.append("profile cases need 0 < θ < 1 so that Ξ and Θ map onto (0, inf)")
    return out


def _v_trivial(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "m", "p"))
    _integers(params, ("k", "m"), out)
    _at_least_one(params, ("p",), out)
    return out


def _v_sandwich(params: CaseParams) -> list[str]:
    out = _missing(params, ("k", "space"))
    _integers(params, ("k",), out)
    if params.space is not None:
        parse_space(params.space)
    return out


# ---------------------------------------------------------------------------
# sides


class MemberContext(Protocol):
    f: GridFunction

    def curve(self, kappa: float, space: Any) -> ModulusCurve: ...

    def kprofile(self, values: np.ndarray, space: Any, k: int) -> QuasiconcaveProfile: ...


Sides = tuple[np.ndarray, np.ndarray]


def _arr(fn: Callable[[float], float], tgrid: np.ndarray) -> np.ndarray:
    return np.array([fn(float(t)) for t in tgrid])


def _tail_form(curve: ModulusCurve, tgrid: np.ndarray, order: float, e: float, q: float) -> np.ndarray:
    """t^order (∫_t^∞ [u^e ω(u)]^q du/u)^{1/q}."""
    return _arr(lambda t: t ** order * curve.tail(t, e, q, upper=math.inf), tgrid)


def _head_form(curve: ModulusCurve, tgrid: np.ndarray, e: float, q: float, factor=None, logpow: float = 0.0) -> np.ndarray:
    """(∫_0^t [u^e factor(u) ω(u)]^q du/u)^{1/q}."""
    return _arr(lambda t: curve.head(t, e, q, factor=factor, factor_log_power_zero=logpow), tgrid)


def _marchaud(ctx: MemberContext, pr: CaseParams, t: np.ndarray, q: float) -> Sides:
    X = Lebesgue(p=pr.p)
    return ctx.curve(pr.k, X)(t), _tail_form(ctx.curve(pr.k + pr.m, X), t, pr.k, -pr.k, q)


def _s_marchaud(ctx, pr, t):
    return _marchaud(ctx, pr, t, 1.0)


def _s_timan(ctx, pr, t):
    return _marchaud(ctx, pr, t, pr.q if pr.q is not None else min(2.0, pr.p))


def _s_reverse_marchaud(ctx, pr, t):
    X = Lebesgue(p=pr.p)
    r = pr.r if pr.r is not None else max(2.0, pr.p)
    return _tail_form(ctx.curve(pr.k + pr.m, X), t, pr.k, -pr.k, r), ctx.curve(pr.k, X)(t)


def _ulyanov_rhs(ctx, pr, t, order: float) -> np.ndarray:
    ps = p_star_of(pr)
    return _head_form(ctx.curve(order, Lebesgue(p=pr.p)), t, -pr.delta, ps)


def _s_ulyanov(ctx, pr, t):
    return ctx.curve(pr.k, Lebesgue(p=p_star_of(pr)))(t), _ulyanov_rhs(ctx, pr, t, pr.k)


def _s_ulyanov_strengthened(ctx, pr, t):
    e = pr.k - pr.delta
    c = ctx.curve(pr.k, Lebesgue(p=p_star_of(pr)))
    lhs = _arr(lambda s: s ** e * c.sup_tail(s, -e, upper=1.0), t)
    return lhs, _ulyanov_rhs(ctx, pr, t, pr.k)


def _s_kolyada(ctx, pr, t):
    c = ctx.curve(pr.k, Lebesgue(p=p_star_of(pr)))
    e = pr.k - pr.delta
    return _tail_form(c, t, e, -e, pr.p), _ulyanov_rhs(ctx, pr, t, pr.k)


def _s_sharp_ulyanov(ctx, pr, t):
    return ctx.curve(pr.k, Lebesgue(p=p_star_of(pr)))(t), _ulyanov_rhs(ctx, pr, t, pr.k + pr.delta)


def _s_prop11a(ctx, pr, t):
    lhs = ctx.curve(pr.beta, Lorentz(p=pr.p, r=pr.r1))(t)
    rhs = _tail_form(ctx.curve(pr.beta + pr.sigma, Lorentz(p=pr.p, r=pr.r0)), t, pr.beta, -pr.beta, pr.q0)
    return lhs, rhs


def _s_prop11b(ctx, pr, t):
    # u^{-γ} inside the integral, as the statement prints it
    lhs = _tail_form(ctx.curve(pr.beta + pr.gamma, Lorentz(p=pr.p, r=pr.r1)), t, pr.beta, -pr.gamma, pr.q1)
    return lhs, ctx.curve(pr.beta, Lorentz(p=pr.p, r=pr.r0))(t)


def _sharp_rhs(ctx, pr, t, p: float, r0: float, q1: float) -> np.ndarray:
    return _head_form(ctx.curve(pr.beta + pr.delta, Lorentz(p=p, r=r0)), t, -pr.delta, q1)


def _s_prop13a(ctx, pr, t):
    ps = p_star_of(pr)
    return ctx.curve(pr.beta, Lorentz(p=ps, r=pr.r1))(t), _sharp_rhs(ctx, pr, t, pr.p, pr.r0, pr.q1)


def _s_prop13b(ctx, pr, t):
    ps = p_star_of(pr)
    lhs = _tail_form(ctx.curve(pr.beta + pr.delta, Lorentz(p=ps, r=pr.r1)), t, pr.beta, -pr.beta, pr.q0)
    return lhs, _sharp_rhs(ctx, pr, t, pr.p, pr.r0, pr.q1)


def _prime_p_star(pr: CaseParams) -> float:
    return pr.p_star if pr.p_star is not None else sobolev_exponent(1.0, pr.delta, pr.n)


def _s_prop13prime_a(ctx, pr, t):
    lhs = ctx.curve(pr.beta, Lorentz(p=_prime_p_star(pr), r=pr.r1))(t)
    rhs = _head_form(ctx.curve(pr.beta + pr.delta, Lebesgue(p=1.0)), t, -pr.delta, pr.q1)
    return lhs, rhs


def _s_prop13prime_b(ctx, pr, t):
    # L_{p*, r1} on the left (the statement's r1 reading)
    c = ctx.curve(pr.beta + pr.delta, Lorentz(p=_prime_p_star(pr), r=pr.r1))
    lhs = _tail_form(c, t, pr.beta, -pr.beta, pr.q0)
    rhs = _head_form(ctx.curve(pr.beta + pr.delta, Lebesgue(p=1.0)), t, -pr.delta, pr.q1)
    return lhs, rhs


def _s_koluly(ctx, pr, t):
    ps = p_star_of(pr)
    return ctx.curve(pr.beta, Lorentz(p=ps, r=pr.r))(t), _sharp_rhs(ctx, pr, t, pr.p, pr.r, pr.r)


def _s_ulykol(ctx, pr, t):
    ps = p_star_of(pr)
    lhs = _tail_form(ctx.curve(pr.beta + pr.gamma, Lorentz(p=ps, r=pr.r)), t, pr.beta, -pr.beta, pr.r)
    return lhs, _sharp_rhs(ctx, pr, t, pr.p, pr.r, pr.r)


def cor59_spaces(pr: CaseParams) -> tuple[Gamma, Lambda]:
    """(Γ_r(ν), Λ_r(w)) with ν the second associate weight of w."""
    w = parse_weight(pr.w)
    nu = second_associate_nu(associate_weight_bar(w, pr.m, pr.n, pr.r), pr.r)
    return Gamma(r=pr.r, w=nu), Lambda(r=pr.r, w=w)


def _s_cor59(ctx, pr, t):
    gam, lam = cor59_spaces(pr)
    return ctx.curve(pr.k, gam)(t), _head_form(ctx.curve(pr.k + pr.m, lam), t, -pr.m, pr.r)


def _s_cor510(ctx, pr, t):
    b = parse_sv(pr.b)
    ps = sobolev_exponent(pr.p, pr.m, pr.n)
    lhs = ctx.curve(pr.k, LorentzKaramata(p=ps, r=pr.r, b=b))(t)
    rhs = _head_form(ctx.curve(pr.k + pr.m, LorentzKaramata(p=pr.p, r=pr.r_bar, b=b)), t, -pr.m, pr.r)
    return lhs, rhs


def thm68_spaces(pr: CaseParams) -> tuple[LorentzKaramata, LorentzKaramata]:
    """(L_{p*,s;B}, L_{p,r;b_n B})."""
    b, B = parse_sv(pr.b), parse_sv(pr.B or "1")
    ps = sobolev_exponent(pr.p, pr.sigma, pr.n)
    return (LorentzKaramata(p=ps, r=pr.s, b=B),
            LorentzKaramata(p=pr.p, r=pr.r, b=sv_product(bn_transform(b, pr.n), B)))


def _s_thm68(ctx, pr, t):
    left, right = thm68_spaces(pr)
    b = parse_sv(pr.b)
    refl = lambda u: b(1.0 / np.asarray(u, dtype=float))  # noqa: E731
    rhs = _head_form(ctx.curve(pr.kappa + pr.sigma, right), t, -pr.sigma, pr.s, factor=refl,
                     logpow=b.end_gamma("inf"))
    return ctx.curve(pr.kappa, left)(t), rhs


def steklov_scales(f: GridFunction, count: int = 8) -> np.ndarray:
    h0 = 2 * max(f.spacing)
    h1 = 0.25 * min(hi - lo for lo, hi in f.box)
    return np.geomspace(h0, h1, count)


def _s_holmstedt(ctx, pr, t):
    """
    A1: K(f,t; X_F, X1) ≤ min_g ‖K(f-g,·)‖_F + t|g|_{W^k X} against the two-term expression
    on K(f,·); A2: K(f,t; X, X_F) ≤ min_g ‖f-g‖_X + t ‖K(g,·)‖_F against the (A2) expression.
    g runs over 0, f and Steklov means.
    """
    X = parse_space(pr.space)
    F: PowerLogLattice = parse_lattice(pr.lattice)
    f = ctx.f
    K = ctx.kprofile(f.values, X, pr.k)
    cands = [np.zeros_like(f.values), f.values]
    cands += [steklov_candidate(f, float(h), pr.k) for h in steklov_scales(f)]
    if pr.form == "A1":
        rhs = np.array([holmstedt_A_rhs(K, F, float(s)) for s in t])
        parts = [(lattice_norm(F, ctx.kprofile(f.values - g, X, pr.k)), derivative_seminorm(f, g, pr.k, X))
                 for g in cands]
    else:
        rhs = np.array([holmstedt_B_rhs(K, F, float(s)) for s in t])
        parts = [(X.profile_norm(_rearranged(f, f.values - g)), lattice_norm(F, ctx.kprofile(g, X, pr.k)))
                 for g in cands]
    lhs = np.array([min(a + float(s) * b for a, b in parts) for s in t])
    return lhs, rhs


def _rearranged(f: GridFunction, values: np.ndarray):
    from smoothlab.core.gridfn import rearrange

    return rearrange(f.with_values(values))


def _s_trivial(ctx, pr, t):
    X = Lebesgue(p=pr.p)
    return ctx.curve(pr.k + pr.m, X)(t), 2.0 ** pr.m * ctx.curve(pr.k, X)(t)


def _s_sandwich(ctx, pr, t):
    X = parse_space(pr.space)
    lhs = np.array([k_upper(ctx.f, float(s), pr.k, X) for s in t])
    return lhs, ctx.curve(pr.k, X)(t)


# ---------------------------------------------------------------------------
# registry


SideKind = Literal["modulus", "head", "tail", "sup_tail", "k", "profile"]


@dataclass(frozen=True)
class CaseDefinition:
    case_id: CaseId
    anchor: str
    validate: Callable[[CaseParams], list[str]]
    sides: Callable[[MemberContext, CaseParams, np.ndarray], Sides]
    kinds: tuple[SideKind, SideKind]
    undersampled: Literal["lhs", "rhs", "both", "none"] = "both"
    extended: bool = False
    asymptotic: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)


CASES: dict[CaseId, CaseDefinition] = {
    d.case_id: d
    for d in (
        CaseDefinition(CaseId.MARCHAUD_CLASSIC, "Marchaud: weak inverse of the trivial bound",
                       _v_marchaud, _s_marchaud, ("modulus", "tail")),
        CaseDefinition(CaseId.TIMAN, "Timan's L_q improvement of Marchaud, q = min(2, p)",
                       _v_timan, _s_timan, ("modulus", "tail")),
        CaseDefinition(CaseId.REVERSE_MARCHAUD, "reverse Marchaud, r = max(2, p)",
                       _v_reverse_marchaud, _s_reverse_marchaud, ("tail", "modulus")),
        CaseDefinition(CaseId.ULYANOV_CLASSIC, "Ul'yanov inequality, L_p to L_p*",
                       _v_ulyanov, _s_ulyanov, ("modulus", "head"), asymptotic=True),
        CaseDefinition(CaseId.ULYANOV_STRENGTHENED, "sup-form extension of Ul'yanov",
                       _v_ulyanov_strengthened, _s_ulyanov_strengthened, ("sup_tail", "head"),
                       asymptotic=True,
                       notes=("needs k < n/p, so at n = 1 it only runs as a probe",)),
        CaseDefinition(CaseId.KOLYADA, "Kolyada's strengthening of Ul'yanov",
                       _v_kolyada, _s_kolyada, ("tail", "head"), asymptotic=True),
        CaseDefinition(CaseId.SHARP_ULYANOV, "sharp Ul'yanov with ω_{k+δ}",
                       _v_sharp_ulyanov, _s_sharp_ulyanov, ("modulus", "head"), asymptotic=True),
        CaseDefinition(CaseId.PROP11A, "Marchaud-type inequality on Lorentz spaces",
                       _v_prop11a, _s_prop11a, ("modulus", "tail"), asymptotic=True),
        CaseDefinition(CaseId.PROP11B, "reverse Marchaud-type inequality on Lorentz spaces",
                       _v_prop11b, _s_prop11b, ("tail", "modulus"), asymptotic=True),
        CaseDefinition(CaseId.PROP13A, "sharp Ul'yanov inequality on Lorentz spaces",
                       _v_prop13a, _s_prop13a, ("modulus", "head")),
        CaseDefinition(CaseId.PROP13B, "Kolyada-type inequality on Lorentz spaces",
                       _v_prop13b, _s_prop13b, ("tail", "head")),
        CaseDefinition(CaseId.PROP13PRIME_A, "sharp Ul'yanov from L_1, n >= 2",
                       lambda pr: _v_prop13prime(pr, False), _s_prop13prime_a,
                       ("modulus", "head"), extended=True),
        CaseDefinition(CaseId.PROP13PRIME_B, "Kolyada-type from L_1, n >= 2",
                       lambda pr: _v_prop13prime(pr, True), _s_prop13prime_b, ("tail", "head"), extended=True,
                       notes=("left side uses L_{p*, r1}; the proof mentions r2",)),
        CaseDefinition(CaseId.KOLULY, "Kolyada + Marchaud special case of Ul'yanov",
                       _v_koluly, _s_koluly, ("modulus", "head")),
        CaseDefinition(CaseId.ULYKOL, "Ul'yanov + reverse Marchaud special case of Kolyada",
                       _v_ulykol, _s_ulykol, ("tail", "head")),
        CaseDefinition(CaseId.COR59, "Γ_r(ν) against Λ_r(w), k + m < n",
                       _v_cor59, _s_cor59, ("modulus", "head"), extended=True),
        CaseDefinition(CaseId.COR510, "Lorentz-Karamata L_{p*,r;b} against L_{p,r̄;b}, k + m < n",
                       _v_cor510, _s_cor510, ("modulus", "head"), extended=True),
        CaseDefinition(CaseId.THM68, "sharp Ul'yanov between Lorentz-Karamata spaces",
                       _v_thm68, _s_thm68, ("modulus", "head"), asymptotic=True,
                       notes=("constants are stratified by b",)),
        CaseDefinition(CaseId.HOLMSTEDT_PROFILE, "two-term Holmstedt expressions on measured K-profiles",
                       _v_holmstedt, _s_holmstedt, ("k", "profile"), undersampled="none"),
        CaseDefinition(CaseId.TRIVIAL_BOUND, "ω_{k+m} <= 2^m ω_k",
                       _v_trivial, _s_trivial, ("modulus", "modulus")),
        CaseDefinition(CaseId.MODULUS_K_SANDWICH, "K(f, t^k; X, W^k X) against ω_k(f, t)_X",
                       _v_sandwich, _s_sandwich, ("k", "modulus"), undersampled="rhs"),
    )
}


def get_case(case_id: str | CaseId) -> CaseDefinition:
    try:
        return CASES[CaseId(case_id)]
    except ValueError:
        raise InputError(f"unknown case id {case_id!r}") from None


def parameter_validate(case_id: str | CaseId, params: CaseParams) -> list[str]:
    """Violated hypotheses as human-readable strings; empty means ok."""
    definition = get_case(case_id)
    try:
        return definition.validate(params)
    except (LabError, ValueError) as e:
        return [str(e)]
