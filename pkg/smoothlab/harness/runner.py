"""
Case runner: evaluates both sides of a case on every family member and t-grid point, reduces
the ratios to a verdict and optionally reruns on a refined grid and on a doubled box.

Members are mapped with a thread pool (order-preserving, so reports do not depend on the
schedule). Measured modulus curves and K-profiles are shared across cases through CurveCache.
"""
from __future__ import annotations

import hashlib
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pydantic
import scipy

from smoothlab.core.gridfn import GridFunction
from smoothlab.core.interp import QuasiconcaveProfile
from smoothlab.core.smoothness import k_upper, modulus_curve, ModulusCurve
from smoothlab.harness.cases import (
    CaseDefinition,
    CaseParams,
    EmptyFamilyError,
    HypothesisViolationError,
    get_case,
    parameter_validate,
)
from smoothlab.harness.families import FamilyMember, FamilySpec, generate_family
from smoothlab.harness.reports import (
    STABLE_CHANGE,
    ArgMax,
    BoxProbe,
    Counts,
    Provenance,
    Refinement,
    Row,
    VerificationReport,
    relative_change,
    trend_of,
    write_report,
)
from smoothlab.harness.schemas import CaseConfig, RunConfig
from smoothlab.harness.svg import write_case_plot
from smoothlab.observability.logging import get_logger
from smoothlab.observability.metrics import record_case_verdict
from smoothlab.shared.env_helpers import get_int_env
from smoothlab.shared.settings import get_lab_settings

logger = get_logger(__name__)

RESOLVED_CELLS = 10
INTERIOR_SHARE = 0.95
MONOTONE_SLACK = 1e-9
PROFILE_OCTAVES_BELOW = 4
PROFILE_TOP_EXPONENT = 3
CACHE_MAX_ENTRIES = get_int_env("SMOOTHLAB_CACHE_MAX_ENTRIES", default=4096)


# ---------------------------------------------------------------------------
# cache


def fingerprint(f: GridFunction) -> str:
    """sha256 over box, counts and raw values. Deterministic."""
    h = hashlib.sha256()
    h.update(repr((tuple(map(tuple, f.box)), tuple(f.counts))).encode("utf-8"))
    h.update(np.ascontiguousarray(f.values, dtype=np.float64).tobytes())
    return h.hexdigest()


class CurveCache:
    """Thread-safe memo for modulus curves and K-profiles. A miss computes outside the lock."""

    def __init__(self, max_entries: int = CACHE_MAX_ENTRIES):
        self._max = max_entries
        self._data: dict[str, Any] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._data:
                self.hits += 1
                return self._data[key]
            self.misses += 1
        value = compute()
        with self._lock:
            if len(self._data) >= self._max:
                self._data.pop(next(iter(self._data)))
            return self._data.setdefault(key, value)

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)


def profile_grid(f: GridFunction) -> np.ndarray:
    """t-points 2^j from a few octaves below the finest spacing up to 2^PROFILE_TOP_EXPONENT."""
    lo = math.floor(math.log2(min(f.spacing))) - PROFILE_OCTAVES_BELOW
    return 2.0 ** np.arange(lo, PROFILE_TOP_EXPONENT + 1, dtype=float)


def measure_kprofile(f: GridFunction, spec, k: int, tgrid: Sequence[float],
                     quiet: bool = False) -> QuasiconcaveProfile:
    """
    K(f, s; X, W^k X) at s = t^k for t in tgrid (k_upper), regularized to a quasiconcave profile
    over s.
    """
    t = np.asarray(tgrid, dtype=float)
    raw = np.array([k_upper(f, float(x), k, spec) for x in t])
    profile = QuasiconcaveProfile.from_measurements(t ** k, raw)
    if profile.is_zero and not quiet:
        logger.warning("kprofile_degenerate", space=spec.literal(), k=k)
    return profile


@dataclass
class MemberEvaluator:
    """Per-member context for case sides: cached curves and K-profiles of one grid function."""

    f: GridFunction
    cache: CurveCache
    mode: str = "axis"
    dir_samples: int = 16
    u_max: float = 0.0
    curves: list[ModulusCurve] = field(default_factory=list)
    _key: str = field(default="", init=False, repr=False)

    def __post_init__(self) -> None:
        self._key = fingerprint(self.f)
        if not self.u_max:
            self.u_max = min(hi - lo for lo, hi in self.f.box) / 4

    def curve(self, kappa: float, space) -> ModulusCurve:
        key = f"curve|{self._key}|{float(kappa)!r}|{space.literal()}|{self.u_max!r}|{self.mode}|{self.dir_samples}"
        c = self.cache.get_or_compute(
            key, lambda: modulus_curve(self.f, kappa, space, self.u_max, mode=self.mode,
                                       dir_samples=self.dir_samples))
        self.curves.append(c)
        return c

    def kprofile(self, values: np.ndarray, space, k: int) -> QuasiconcaveProfile:
        g = self.f.with_values(values)
        key = f"kprofile|{fingerprint(g)}|{space.literal()}|{k}"
        grid = profile_grid(self.f)
        return self.cache.get_or_compute(key, lambda: measure_kprofile(g, space, k, grid, quiet=True))


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class RunOptions:
    seed: int = 0
    cells: int = 4096
    half_width: float = 1.0
    tgrid: np.ndarray = field(default_factory=lambda: 2.0 ** np.arange(-8, -1, dtype=float))
    ceiling: float = 100.0
    jobs: int = 1
    dir_samples: int = 16


@dataclass
class MemberResult:
    f_id: str
    lhs: np.ndarray
    rhs: np.ndarray
    one_sided: bool
    max_spacing: float


def _evaluate_member(definition: CaseDefinition, params: CaseParams, member: FamilyMember,
                     tgrid: np.ndarray, mode: str, dir_samples: int, cache: CurveCache) -> MemberResult:
    ctx = MemberEvaluator(member.f, cache, mode=mode, dir_samples=dir_samples)
    lhs, rhs = definition.sides(ctx, params, tgrid)
    return MemberResult(
        f_id=member.f_id,
        lhs=np.asarray(lhs, dtype=float),
        rhs=np.asarray(rhs, dtype=float),
        one_sided=any(c.one_sided for c in ctx.curves),
        max_spacing=max(member.f.spacing),
    )


def _evaluate(definition: CaseDefinition, params: CaseParams, members: list[FamilyMember], tgrid: np.ndarray,
              mode: str, dir_samples: int, cache: CurveCache, jobs: int) -> list[MemberResult]:
    def one(m: FamilyMember) -> MemberResult:
        return _evaluate_member(definition, params, m, tgrid, mode, dir_samples, cache)

    if jobs <= 1 or len(members) <= 1:
        return [one(m) for m in members]
    with ThreadPoolExecutor(max_workers=min(jobs, len(members))) as pool:
        return list(pool.map(one, members))


def _row(f_id: str, t: float, lhs: float, rhs: float, resolved: bool) -> Row:
    ratio = None
    if math.isfinite(rhs) and rhs > 0:
        ratio = lhs / rhs
    if not resolved:
        return Row(f_id=f_id, t=t, lhs=lhs, rhs=rhs, ratio=ratio, status="unresolved")
    if math.isinf(rhs):
        return Row(f_id=f_id, t=t, lhs=lhs, rhs=rhs, status="infinite_rhs")
    if rhs == 0:
        if lhs == 0:
            return Row(f_id=f_id, t=t, lhs=lhs, rhs=rhs, status="degenerate")
        return Row(f_id=f_id, t=t, lhs=lhs, rhs=rhs, ratio=math.inf, status="zero_rhs")
    if math.isinf(lhs):
        return Row(f_id=f_id, t=t, lhs=lhs, rhs=rhs, ratio=math.inf, status="infinite_lhs")
    return Row(f_id=f_id, t=t, lhs=lhs, rhs=rhs, ratio=ratio, status="ok")


def _monotone_warnings(definition: CaseDefinition, results: list[MemberResult]) -> list[str]:
    out = []
    for res in results:
        for side, kind, values in (("lhs", definition.kinds[0], res.lhs), ("rhs", definition.kinds[1], res.rhs)):
            if kind not in ("modulus", "head", "k"):
                continue
            finite = values[np.isfinite(values)]
            if finite.size < 2:
                continue
            scale = max(1.0, float(np.max(np.abs(finite))))
            if np.any(np.diff(finite) < -MONOTONE_SLACK * scale):
                out.append(f"{res.f_id}: {side} is not non-decreasing in t")
    return out


@dataclass
class Reduction:
    rows: list[Row]
    counts: Counts
    sup_ratio: Optional[float]
    inf_ratio: Optional[float]
    argmax: Optional[ArgMax]
    per_decade: dict[str, float]
    interior_holds: Optional[bool]


def reduce_results(results: list[MemberResult], tgrid: np.ndarray) -> Reduction:
    """Rows, status counts and ratio statistics over resolved points."""
    rows: list[Row] = []
    for res in results:
        floor = RESOLVED_CELLS * res.max_spacing
        for t, lhs, rhs in zip(tgrid, res.lhs, res.rhs):
            rows.append(_row(res.f_id, float(t), float(lhs), float(rhs), resolved=float(t) >= floor))
    counts = Counts(rows=len(rows))
    for r in rows:
        setattr(counts, r.status, getattr(counts, r.status) + 1)
    scored = [r for r in rows if r.status in ("ok", "zero_rhs", "infinite_lhs")]
    if not scored:
        return Reduction(rows, counts, None, None, None, {}, None)
    best = max(scored, key=lambda r: r.ratio)
    per_decade: dict[str, float] = {}
    for r in scored:
        key = str(int(math.floor(math.log10(r.t))))
        per_decade[key] = max(per_decade.get(key, 0.0), r.ratio)
    interior_holds = None
    if len(per_decade) >= 2:
        outermost = min(per_decade, key=int)
        interior = max(v for k, v in per_decade.items() if k != outermost)
        interior_holds = bool(interior >= INTERIOR_SHARE * best.ratio)
    return Reduction(
        rows=rows,
        counts=counts,
        sup_ratio=best.ratio,
        inf_ratio=min(r.ratio for r in scored),
        argmax=ArgMax(f_id=best.f_id, t=best.t),
        per_decade=per_decade,
        interior_holds=interior_holds,
    )


def _verdict(red: Reduction, ceiling: float, probe: bool) -> str:
    if probe:
        return "PROBE"
    if red.sup_ratio is None:
        c = red.counts
        if c.degenerate and not (c.infinite_rhs or c.ok):
            return "DEGENERATE"
        return "INCONCLUSIVE"
    return "PASS" if red.sup_ratio <= ceiling else "FAIL"


def pad_box(f: GridFunction) -> GridFunction:
    """Zero-extend to the doubled box at the same spacing."""
    pads = [(c // 2, c - c // 2) for c in f.counts]
    values = np.pad(f.values, pads, mode="constant")
    box = []
    for (lo, hi), (a, b), dx in zip(f.box, pads, f.spacing):
        box.append((lo - a * dx, hi + b * dx))
    return GridFunction(dim=f.dim, box=box, counts=list(values.shape), values=values)


def _sup_only(definition: CaseDefinition, params: CaseParams, members: list[FamilyMember], tgrid: np.ndarray,
              mode: str, dir_samples: int, cache: CurveCache, jobs: int) -> Optional[float]:
    return reduce_results(_evaluate(definition, params, members, tgrid, mode, dir_samples, cache, jobs),
                          tgrid).sup_ratio


def _module_versions() -> dict[str, str]:
    return {"numpy": np.__version__, "scipy": scipy.__version__, "pydantic": pydantic.VERSION}


def run_case(case: CaseConfig, family_name: str, family: FamilySpec, options: RunOptions,
             cache: Optional[CurveCache] = None, members: Optional[list[FamilyMember]] = None) -> VerificationReport:
    """
    Evaluate one case over one family. Raises HypothesisViolationError when the parameters fall
    outside the case hypotheses (unless probing) and EmptyFamilyError for an empty family.
    """
    definition = get_case(case.id)
    label = case.name
    cache = CurveCache() if cache is None else cache
    violations = parameter_validate(case.id, case.params)
    if violations and not case.probe:
        logger.warning("hypothesis_violation", case_id=case.id.value, label=label, violations=violations)
        raise HypothesisViolationError(case.id.value, violations)
    if members is None:
        members = generate_family(family, options.seed, options.cells, options.half_width)
    if not members:
        raise EmptyFamilyError(f"{label}: family {family_name!r} has no members")
    tgrid = case.tgrid.points() if case.tgrid is not None else np.asarray(options.tgrid, dtype=float)
    ceiling = case.ceiling or options.ceiling
    started = time.perf_counter()
    logger.info("case_started", case_id=case.id.value, label=label, family=family_name, members=len(members),
                points=int(tgrid.size))

    results = _evaluate(definition, case.params, members, tgrid, case.mode, options.dir_samples, cache, options.jobs)
    red = reduce_results(results, tgrid)
    verdict = _verdict(red, ceiling, case.probe)
    f0 = members[0].f
    one_sided = any(r.one_sided for r in results) and definition.undersampled in ("lhs", "both")

    refinement = None
    if case.refine and not case.probe:
        refinement = _refine(definition, case, family, options, red.sup_ratio, cache)
    box = None
    if case.box_probe:
        padded = [FamilyMember(m.f_id, pad_box(m.f)) for m in members]
        sup = _sup_only(definition, case.params, padded, tgrid, case.mode, options.dir_samples, cache,
                        options.jobs)
        box = BoxProbe(half_width=(f0.box[0][1] - f0.box[0][0]) / 2,
                       padded_half_width=(padded[0].f.box[0][1] - padded[0].f.box[0][0]) / 2,
                       sup_ratio=red.sup_ratio, padded_sup_ratio=sup,
                       relative_change=relative_change(red.sup_ratio, sup))

    notes = list(definition.notes)
    if violations:
        notes.append("probe run outside the stated hypotheses")
    report = VerificationReport(
        case_id=case.id.value,
        label=label,
        anchor=definition.anchor,
        parameters=case.params.public(),
        family=family_name,
        verdict=verdict,
        ceiling=ceiling,
        sup_ratio=red.sup_ratio,
        inf_ratio=red.inf_ratio,
        argmax=red.argmax,
        per_decade=red.per_decade,
        interior_holds=red.interior_holds if definition.asymptotic else None,
        counts=red.counts,
        violations=violations,
        probe=case.probe,
        extended=_is_extended(case, definition),
        asymptotic=definition.asymptotic,
        undersampled_side=definition.undersampled if f0.dim >= 2 else "none",
        one_sided_evidence=one_sided,
        monotone_warnings=_monotone_warnings(definition, results),
        notes=notes,
        refinement=refinement,
        box_probe=box,
        provenance=Provenance(
            seed=options.seed,
            family_kind=family.kind,
            family_count=len(members),
            dim=f0.dim,
            cells=f0.counts[0],
            half_width=(f0.box[0][1] - f0.box[0][0]) / 2,
            tgrid=[float(t) for t in tgrid],
            mode=case.mode,
            dir_samples=options.dir_samples,
            modules=_module_versions(),
        ),
        rows=red.rows,
    )
    seconds = time.perf_counter() - started
    report.set_seconds(seconds)
    record_case_verdict(case.id.value, verdict, seconds)
    if verdict in ("INCONCLUSIVE", "DEGENERATE", "FAIL"):
        logger.warning("case_verdict", case_id=case.id.value, label=label, verdict=verdict, sup_ratio=red.sup_ratio)
    logger.info("case_finished", case_id=case.id.value, label=label, verdict=verdict, sup_ratio=red.sup_ratio,
                seconds=round(seconds, 3))
    return report


def _refine(definition: CaseDefinition, case: CaseConfig, family: FamilySpec, options: RunOptions,
            sup: Optional[float], cache: CurveCache) -> Refinement:
    cells = family.cells or options.cells
    fine_family = family.model_copy(update={"cells": 2 * cells})
    fine = generate_family(fine_family, options.seed, 2 * cells, options.half_width)
    tgrid = case.tgrid.points() if case.tgrid is not None else np.asarray(options.tgrid, dtype=float)
    fine_sup = _sup_only(definition, case.params, fine, tgrid, case.mode, options.dir_samples, cache,
                         options.jobs)
    change = relative_change(sup, fine_sup)
    stable = change is not None and change < STABLE_CHANGE
    if not stable:
        logger.warning("refinement_unstable", case_id=case.id.value, label=case.name, sup_ratio=sup,
                       refined_sup_ratio=fine_sup, relative_change=change)
    return Refinement(cells=cells, refined_cells=2 * cells, sup_ratio=sup, refined_sup_ratio=fine_sup,
                      relative_change=change, stable=stable, trend=trend_of(sup, fine_sup))


def _is_extended(case: CaseConfig, definition: CaseDefinition) -> bool:
    return definition.extended if case.extended is None else case.extended


def _violation_report(case: CaseConfig, family_name: str, options: RunOptions,
                      err: HypothesisViolationError) -> VerificationReport:
    definition = get_case(case.id)
    report = VerificationReport(
        case_id=case.id.value,
        label=case.name,
        anchor=definition.anchor,
        parameters=case.params.public(),
        family=family_name,
        verdict="VIOLATION",
        ceiling=case.ceiling or options.ceiling,
        violations=err.violations,
        extended=_is_extended(case, definition),
        asymptotic=definition.asymptotic,
        notes=list(definition.notes),
    )
    record_case_verdict(case.id.value, "VIOLATION")
    return report


@dataclass
class SuiteResult:
    reports: list[VerificationReport]
    skipped: list[str]
    exit_code: int
    written: list[Path] = field(default_factory=list)


def options_from_config(config: RunConfig, jobs: Optional[int] = None) -> RunOptions:
    settings = get_lab_settings()
    return RunOptions(
        seed=settings.SEED if config.seed is None else config.seed,
        cells=config.grid.cells,
        half_width=config.grid.half_width,
        tgrid=config.tgrid.points(),
        ceiling=config.ceiling or settings.CEILING,
        jobs=jobs or config.jobs or settings.JOBS,
        dir_samples=config.dir_samples or settings.DIR_SAMPLES,
    )


def run_suite(config: RunConfig, out: Optional[str | Path] = None, jobs: Optional[int] = None,
              extended: bool = False, plots: bool = True) -> SuiteResult:
    """
    Run every selected case. Extended cases are skipped unless `extended`. Exit code 0 when every
    report passes, 1 otherwise. Reports are written to `out` when given.
    """
    options = options_from_config(config, jobs=jobs)
    cache = CurveCache()
    reports: list[VerificationReport] = []
    skipped: list[str] = []
    written: list[Path] = []
    for case in config.cases:
        definition = get_case(case.id)
        if _is_extended(case, definition) and not extended:
            logger.info("case_skipped", case_id=case.id.value, label=case.name, reason="extended")
            skipped.append(case.name)
            continue
        family = config.families[case.family]
        try:
            report = run_case(case, case.family, family, options, cache=cache)
        except HypothesisViolationError as e:
            report = _violation_report(case, case.family, options, e)
        reports.append(report)
        if out is not None:
            written += write_report(report, out)
            if plots and report.rows:
                written.append(write_case_plot(report, Path(out) / f"{report.label}.svg"))
    logger.info("suite_finished", cases=len(reports), skipped=len(skipped), cache_entries=len(cache),
                cache_hits=cache.hits)
    exit_code = 0 if all(r.passed for r in reports) else 1
    return SuiteResult(reports=reports, skipped=skipped, exit_code=exit_code, written=written)
