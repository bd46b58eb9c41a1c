"""
Parsers for the config literals: numbers, slowly varying factors ("log^0.5", "logplus^0.5"),
weights ("t^-0.5*log^1**2") and the call syntax shared by space and lattice literals
("Lorentz(p=2,r=1)", "F(q=2,theta=0.4,gamma=0)").
"""
from __future__ import annotations

import math
import re
from typing import Any

from smoothlab.core.weights import PowerSVWeight, SlowlyVarying, SVPiece
from smoothlab.shared.errors import InputError

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$", re.S)
_SV_POWER = re.compile(r"^(log|logplus|logminus)\^(.+)$")
_SV_PAIR = re.compile(r"^log\((.+),(.+)\)$")


def parse_number(text: Any, what: str = "number") -> float:
    """Float, 'inf', or a fraction 'a/b'."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip().lower()
    if s in ("inf", "+inf", "infinity", "∞"):
        return math.inf
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return float(num) / float(den)
        return float(s)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad {what}: {text!r}") from None


def split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on `sep` outside parentheses and brackets."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise InputError(f"unbalanced parentheses in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise InputError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def parse_call(text: str) -> tuple[str, dict[str, str]]:
    """'Name(k=v,...)' -> (name, {k: v}); values stay as text."""
    m = _CALL.match(text)
    if not m:
        raise InputError(f"expected Name(key=value,...), got {text!r}")
    name, body = m.group(1), m.group(2).strip()
    args: dict[str, str] = {}
    if body:
        for item in split_top_level(body):
            if "=" not in item:
                raise InputError(f"argument {item!r} in {text!r} is not key=value")
            k, v = item.split("=", 1)
            k = k.strip()
            if k in args:
                raise InputError(f"duplicate argument {k!r} in {text!r}")
            args[k] = v.strip()
    return name, args


def parse_sv(text: Any) -> SlowlyVarying:
    if isinstance(text, SlowlyVarying):
        return text
    if isinstance(text, (list, tuple)):
        return SlowlyVarying(pieces=tuple(SVPiece.model_validate(p) for p in text))
    if isinstance(text, dict):
        return SlowlyVarying.model_validate(text)
    s = str(text).replace(" ", "")
    m = _SV_POWER.match(s)
    if m:
        kind, g = m.group(1), parse_number(m.group(2), "log exponent")
        if kind == "log":
            return SlowlyVarying.log_power(g)
        if kind == "logplus":
            return SlowlyVarying.two_piece(gamma_high=g)
        return SlowlyVarying(pieces=(SVPiece(lo=0, hi=1, gamma=g), SVPiece(lo=1, hi=math.inf)))
    m = _SV_PAIR.match(s)
    if m:
        return SlowlyVarying.two_piece(gamma_high=parse_number(m.group(2)), gamma_low=parse_number(m.group(1)))
    if s.startswith("sv(") and s.endswith(")"):
        pieces = []
        for item in s[3:-1].split(";"):
            m2 = re.match(r"^\[(.+),(.+)\):(.+):(.+):(.+)$", item)
            if not m2:
                raise InputError(f"bad slowly varying piece {item!r}")
            lo, hi, g, lam, c = (parse_number(x) for x in m2.groups())
            pieces.append(SVPiece(lo=lo, hi=hi, gamma=g, log_scale=lam, factor=c))
        return SlowlyVarying(pieces=tuple(pieces))
    try:
        c = parse_number(s, "slowly varying factor")
    except InputError:
        raise InputError(f"unknown slowly varying literal {text!r}") from None
    if not (c > 0 and math.isfinite(c)):
        raise InputError(f"constant factor must be positive and finite: {text!r}")
    return SlowlyVarying.constant(c)


def _split_factors(s: str) -> list[str]:
    out, depth, cur, i = [], 0, [], 0
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            if s[i:i + 2] == "**":
                cur.append("**")
                i += 2
                continue
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
        i += 1
    out.append("".join(cur))
    return out


def parse_weight(text: Any) -> PowerSVWeight:
    """Weight literal 'c*t^a*SV**rho' or the mapping form {"alpha", "sv", "power"}."""
    if isinstance(text, PowerSVWeight):
        return text
    if isinstance(text, dict):
        return PowerSVWeight.model_validate(text)
    s = str(text).replace(" ", "")
    if not s:
        raise InputError("empty weight literal")
    alpha, scale, sv, power = 0.0, 1.0, None, 1.0
    for factor in _split_factors(s):
        if not factor:
            raise InputError(f"empty factor in weight {text!r}")
        if factor == "t":
            alpha += 1.0
        elif factor.startswith("t^"):
            alpha += parse_number(factor[2:], "power exponent")
        else:
            base, _, rho = factor.partition("**")
            try:
                c = parse_number(base)
            except InputError:
                c = None
            if c is not None and not rho:
                if not (c > 0 and math.isfinite(c)):
                    raise InputError(f"weight scale must be positive: {text!r}")
                scale *= c
                continue
            if sv is not None:
                raise InputError(f"weight {text!r} has more than one slowly varying factor")
            sv = parse_sv(base)
            power = parse_number(rho, "power") if rho else 1.0
    if sv is None:
        return PowerSVWeight(alpha=alpha, scale=scale)
    return PowerSVWeight(alpha=alpha, scale=scale, sv=sv, power=power)
