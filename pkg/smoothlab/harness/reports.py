"""
Verification reports: pydantic models, canonical JSON, per-case CSV, timing sidecar and the
best-constant summary table.

Infinities serialize as the string "inf"; timing is kept out of the canonical JSON so that two
runs with the same (seed, config) produce byte-identical report files.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Annotated, Any, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, PrivateAttr

from smoothlab import SCHEMA_VERSION, __version__
from smoothlab.shared.config import ConfigError
from smoothlab.shared.files import atomic_write_text

STABLE_CHANGE = 0.05

Verdict = Literal["PASS", "FAIL", "INCONCLUSIVE", "DEGENERATE", "PROBE", "VIOLATION"]
RowStatus = Literal["ok", "infinite_rhs", "infinite_lhs", "zero_rhs", "degenerate", "unresolved"]


def _to_float(v: Any) -> Any:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s == "-inf":
            return -math.inf
    return v


def _to_json(v: float) -> Any:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


JsonFloat = Annotated[float, BeforeValidator(_to_float), PlainSerializer(_to_json, when_used="json")]


class Row(BaseModel):
    model_config = ConfigDict(frozen=True)

    f_id: str
    t: float
    lhs: JsonFloat
    rhs: JsonFloat
    ratio: Optional[JsonFloat] = None
    status: RowStatus = "ok"


class Counts(BaseModel):
    rows: int = 0
    ok: int = 0
    infinite_rhs: int = 0
    infinite_lhs: int = 0
    zero_rhs: int = 0
    degenerate: int = 0
    unresolved: int = 0


class ArgMax(BaseModel):
    f_id: str
    t: float


class Refinement(BaseModel):
    cells: int
    refined_cells: int
    sup_ratio: Optional[JsonFloat] = None
    refined_sup_ratio: Optional[JsonFloat] = None
    relative_change: Optional[JsonFloat] = None
    stable: bool = False
    trend: Literal["up", "down", "flat", "unknown"] = "unknown"


class BoxProbe(BaseModel):
    half_width: float
    padded_half_width: float
    sup_ratio: Optional[JsonFloat] = None
    padded_sup_ratio: Optional[JsonFloat] = None
    relative_change: Optional[JsonFloat] = None


class Provenance(BaseModel):
    smoothlab_version: str = __version__
    seed: int
    family_kind: str
    family_count: int
    dim: int
    cells: int
    half_width: float
    tgrid: list[float]
    mode: str
    dir_samples: int
    modules: dict[str, str] = Field(default_factory=dict)


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=False)

    schema_version: str = SCHEMA_VERSION
    case_id: str
    label: str
    anchor: str
    parameters: dict[str, Any]
    family: str
    verdict: Verdict
    ceiling: float
    sup_ratio: Optional[JsonFloat] = None
    inf_ratio: Optional[JsonFloat] = None
    argmax: Optional[ArgMax] = None
    per_decade: dict[str, JsonFloat] = Field(default_factory=dict)
    interior_holds: Optional[bool] = None
    counts: Counts = Field(default_factory=Counts)
    violations: list[str] = Field(default_factory=list)
    probe: bool = False
    extended: bool = False
    asymptotic: bool = False
    undersampled_side: str = "none"
    one_sided_evidence: bool = False
    monotone_warnings: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)
    refinement: Optional[Refinement] = None
    box_probe: Optional[BoxProbe] = None
    provenance: Optional[Provenance] = None
    rows: list[Row] = Field(default_factory=list)

    _seconds: float = PrivateAttr(default=0.0)

    @property
    def seconds(self) -> float:
        return self._seconds

    def set_seconds(self, seconds: float) -> None:
        self._seconds = seconds

    @property
    def passed(self) -> bool:
        return self.verdict in ("PASS", "PROBE")

    def to_json(self) -> str:
        """Canonical form: sorted keys, 2-space indent, trailing newline."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["t,lhs,rhs,ratio,f_id"]
        for r in self.rows:
            ratio = "" if r.ratio is None else _fmt(r.ratio)
            lines.append(f"{_fmt(r.t)},{_fmt(r.lhs)},{_fmt(r.rhs)},{ratio},{r.f_id}")
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def relative_change(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None or not math.isfinite(a) or not math.isfinite(b):
        return None
    if a == 0:
        return 0.0 if b == 0 else math.inf
    return abs(b - a) / abs(a)


def trend_of(a: Optional[float], b: Optional[float]) -> str:
    change = relative_change(a, b)
    if change is None:
        return "unknown"
    if change < STABLE_CHANGE:
        return "flat"
    return "up" if b > a else "down"


def write_report(report: VerificationReport, out: str | Path) -> list[Path]:
    """<label>.json, <label>.csv and <label>.timing.json under `out`."""
    base = Path(out)
    written = [
        atomic_write_text(base / f"{report.label}.json", report.to_json()),
        atomic_write_text(base / f"{report.label}.csv", report.to_csv()),
        atomic_write_text(base / f"{report.label}.timing.json",
                          json.dumps({"label": report.label, "seconds": round(report.seconds, 6)}) + "\n"),
    ]
    return written


def load_report(path: str | Path) -> VerificationReport:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"report not found: {p}", key="report") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid report JSON in {p}: {e}", key="report") from e
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"report {p} has schema version {data.get('schema_version')!r}", key="schema_version")
    return VerificationReport.model_validate(data)


# ---------------------------------------------------------------------------
# best constants


class SummaryRow(BaseModel):
    case_id: str
    stratum: str
    labels: list[str]
    families: list[str]
    best_constant: Optional[JsonFloat] = None
    verdicts: list[str]
    stability: Literal["stable", "unstable", "unrefined"] = "unrefined"
    trend: str = "unknown"
    max_relative_change: Optional[JsonFloat] = None


def _stratum(report: VerificationReport) -> str:
    b = report.parameters.get("b")
    return f"b={b}" if b is not None else "-"


def best_constant(reports: list[VerificationReport]) -> list[SummaryRow]:
    """Largest sup ratio per (case_id, stratum); stability from the refinement blocks."""
    groups: dict[tuple[str, str], list[VerificationReport]] = {}
    for r in reports:
        groups.setdefault((r.case_id, _stratum(r)), []).append(r)
    out = []
    for (case_id, stratum), items in sorted(groups.items()):
        ratios = [r.sup_ratio for r in items if r.sup_ratio is not None]
        refined = [r.refinement for r in items if r.refinement is not None]
        if refined:
            stable = all(x.stable for x in refined)
            changes = [x.relative_change for x in refined if x.relative_change is not None]
            worst = max(refined, key=lambda x: -1.0 if x.relative_change is None else x.relative_change)
            row_stability = "stable" if stable else "unstable"
            row_trend = "flat" if stable else worst.trend
            max_change = max(changes) if changes else None
        else:
            row_stability, row_trend, max_change = "unrefined", "unknown", None
        out.append(SummaryRow(
            case_id=case_id,
            stratum=stratum,
            labels=[r.label for r in items],
            families=sorted({r.family for r in items}),
            best_constant=max(ratios) if ratios else None,
            verdicts=[r.verdict for r in items],
            stability=row_stability,
            trend=row_trend,
            max_relative_change=max_change,
        ))
    return out


def summary_csv(rows: list[SummaryRow]) -> str:
    lines = ["case_id,stratum,best_constant,stability,trend,max_relative_change,verdicts,labels"]
    for r in rows:
        best = "" if r.best_constant is None else _fmt(r.best_constant)
        change = "" if r.max_relative_change is None else _fmt(r.max_relative_change)
        lines.append(",".join([r.case_id, r.stratum, best, r.stability, r.trend, change,
                               ";".join(r.verdicts), ";".join(r.labels)]))
    return "\n".join(lines) + "\n"


def format_summary(rows: list[SummaryRow]) -> str:
    """Fixed-width table for stdout."""
    head = f"{'case':<22} {'stratum':<28} {'constant':>14} {'stability':>10} {'trend':>8}"
    lines = [head, "-" * len(head)]
    for r in rows:
        best = "-" if r.best_constant is None else ("+inf" if math.isinf(r.best_constant) else f"{r.best_constant:.6g}")
        lines.append(f"{r.case_id:<22} {r.stratum[:28]:<28} {best:>14} {r.stability:>10} {r.trend:>8}")
    return "\n".join(lines) + "\n"
