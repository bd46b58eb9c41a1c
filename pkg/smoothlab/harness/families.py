"""
Seeded test-function families on the box [-L, L]^n. Every member is supported well inside
[-L/2, L/2]^n so zero extension loses nothing; member i uses default_rng([seed, i]).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import interpolate

from smoothlab.core.gridfn import GridFunction
from smoothlab.shared.errors import InputError

FamilyKind = Literal["indicators", "hats", "splines", "gaussians", "cusps", "trig", "smooth", "mixed", "zero"]

BOUNDARY_MASS = 1e-12

COMPOSITES: dict[str, tuple[str, ...]] = {
    "smooth": ("splines", "gaussians"),
    "mixed": ("splines", "gaussians", "cusps"),
}


class FamilySpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: FamilyKind
    count: int = Field(5, ge=1, le=1000)
    dim: int = Field(1, ge=1, le=3)
    cells: int | None = Field(None, ge=8, description="per axis; None uses the run grid")
    half_width: float | None = Field(None, gt=0)


@dataclass(frozen=True)
class FamilyMember:
    f_id: str
    f: GridFunction


Generator = Callable[[np.random.Generator, tuple[np.ndarray, ...], float], np.ndarray]


def _radius(mesh: tuple[np.ndarray, ...], centre: np.ndarray) -> np.ndarray:
    return np.sqrt(sum((x - c) ** 2 for x, c in zip(mesh, centre)))


def _indicators(rng, mesh, L):
    out = np.zeros(mesh[0].shape)
    for _ in range(int(rng.integers(1, 4))):
        lo = rng.uniform(-L / 2, L / 4, size=len(mesh))
        hi = lo + rng.uniform(L / 16, L / 4, size=len(mesh))
        inside = np.ones(mesh[0].shape, dtype=bool)
        for x, a, b in zip(mesh, lo, hi):
            inside &= (x >= a) & (x < b)
        out += rng.uniform(0.5, 2.0) * inside
    return out


def _hat(x: np.ndarray, c: float, w: float) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x - c) / w)


def _hats(rng, mesh, L):
    out = np.zeros(mesh[0].shape)
    links = int(rng.integers(1, 4))
    centres = np.sort(rng.uniform(-L / 4, L / 4, size=links))
    for c in centres:
        w = rng.uniform(L / 16, L / 5)
        term = rng.uniform(0.5, 1.5) * _hat(mesh[0], c, w)
        for x in mesh[1:]:
            term = term * _hat(x, 0.0, L / 4)
        out += term
    return out


def _spline_1d(rng, x: np.ndarray, L: float) -> np.ndarray:
    k = 3
    inner = int(rng.integers(4, 9))
    knots = np.linspace(-L / 2, L / 2, inner + 2 * k + 1)
    coef = rng.normal(size=knots.size - k - 1)
    coef[:k] = 0.0
    coef[-k:] = 0.0
    spl = interpolate.BSpline(knots, coef, k, extrapolate=False)
    return np.nan_to_num(spl(x), nan=0.0)


def _splines(rng, mesh, L):
    out = _spline_1d(rng, mesh[0], L)
    for x in mesh[1:]:
        out = out * _spline_1d(rng, x, L)
    return out


def _gaussians(rng, mesh, L):
    out = np.zeros(mesh[0].shape)
    for _ in range(int(rng.integers(1, 3))):
        centre = rng.uniform(-L / 4, L / 4, size=len(mesh))
        sigma = rng.uniform(L / 40, L / 16)
        out += rng.uniform(0.5, 2.0) * np.exp(-_radius(mesh, centre) ** 2 / (2 * sigma ** 2))
    return out


def _cusps(rng, mesh, L):
    centre = rng.uniform(-L / 8, L / 8, size=len(mesh))
    a = rng.uniform(0.3, 1.5)
    rho = rng.uniform(L / 8, L / 4)
    r = _radius(mesh, centre)
    return np.where(r < rho, r ** a, 0.0)


def _trig(rng, mesh, L):
    out = np.zeros(mesh[0].shape)
    for _ in range(int(rng.integers(2, 5))):
        freq = rng.uniform(0.5, 6.0, size=len(mesh)) * np.pi / L
        phase = sum(fr * x for fr, x in zip(freq, mesh)) + rng.uniform(0, 2 * np.pi)
        out += rng.normal() * np.cos(phase)
    inside = np.ones(mesh[0].shape, dtype=bool)
    for x in mesh:
        inside &= np.abs(x) < L / 2
    return out * inside


def _zero(rng, mesh, L):
    return np.zeros(mesh[0].shape)


GENERATORS: dict[str, Generator] = {
    "indicators": _indicators,
    "hats": _hats,
    "splines": _splines,
    "gaussians": _gaussians,
    "cusps": _cusps,
    "trig": _trig,
    "zero": _zero,
}


def _check_support(values: np.ndarray) -> None:
    """Outermost cell layer must carry < BOUNDARY_MASS of the peak (mass outside the box ~ 0)."""
    peak = float(np.max(np.abs(values)))
    if peak == 0:
        return
    for axis in range(values.ndim):
        edge = np.concatenate((np.take(values, [0], axis=axis).ravel(), np.take(values, [-1], axis=axis).ravel()))
        if float(np.max(np.abs(edge))) > BOUNDARY_MASS * peak:
            raise InputError("generated function does not vanish at the box boundary")


def generate_family(spec: FamilySpec, seed: int, cells: int, half_width: float) -> list[FamilyMember]:
    """Members f_0..f_{count-1}; composites cycle through their parts."""
    cells = spec.cells or cells
    L = spec.half_width or half_width
    parts = COMPOSITES.get(spec.kind, (spec.kind,))
    box = [(-L, L)] * spec.dim
    counts = [cells] * spec.dim
    members = []
    for i in range(spec.count):
        kind = parts[i % len(parts)]
        rng = np.random.default_rng([seed, i])
        gen = GENERATORS[kind]
        f = GridFunction.from_callable(lambda *mesh, g=gen, r=rng: g(r, mesh, L), box, counts)
        _check_support(f.values)
        members.append(FamilyMember(f_id=f"{kind}-{i}", f=f))
    return members
