"""End-to-end runs: network -> KG -> transactions -> rules -> reports."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from datetime import timedelta
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

from .enrich import EnrichmentConfig, enrich_db
from .fpgrowth import AssociationRule, RuleSet, mine_rules
from .ingest import DiscretizationScheme, Transaction, discretize, load_measurements, select_quantities
from .inp import parse_inp
from .items import item_key
from .kg import KnowledgeGraph, build_kg, default_schema, load_schema, load_sensor_map
from .quality import ruleset_stats, score_rules

MINING_MODES = ("baseline", "literal", "generalized")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass
class RunConfig:
    inp: Path
    sensors: Path
    measurements: Path
    schema: Optional[Path] = None
    min_support: float = 0.2
    min_confidence: float = 0.9
    k_neighbors: int = 1
    mode: str = "generalized"
    include_attributes: bool = False
    window_hours: float = 24.0
    precision: int = 0
    attribute_bins: int = 5
    quantities: Optional[tuple[str, ...]] = None
    out: Optional[Path] = None
    fmt: str = "jsonl"

    def __post_init__(self):
        for name in ("min_support", "min_confidence"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {value}")
        if self.mode not in MINING_MODES:
            raise ValueError(f"mode must be one of {MINING_MODES}")
        if self.fmt not in ("jsonl", "csv"):
            raise ValueError("format must be jsonl or csv")
        for name in ("inp", "sensors", "measurements", "schema"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"{name} file not found: {path}")

    @property
    def scheme(self) -> DiscretizationScheme:
        return DiscretizationScheme(window=timedelta(hours=self.window_hours), precision=self.precision,
                                    attribute_bins=self.attribute_bins)

    @property
    def enrichment(self) -> EnrichmentConfig:
        return EnrichmentConfig(self.k_neighbors, self.mode if self.mode != "baseline" else "literal",
                                self.include_attributes, self.attribute_bins)


@dataclass
class Prepared:
    kg: KnowledgeGraph
    db: list[Transaction]
    mined: list[Transaction] = field(default_factory=list)


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage tag
        raise PipelineError(name, exc) from exc


def prepare(config: RunConfig) -> Prepared:
    """Parse, build the KG, load and discretize; enrich unless running the baseline."""
    model = _stage("parse", lambda: parse_inp(Path(config.inp).read_text()))
    schema = _stage("schema", lambda: load_schema(config.schema) if config.schema else default_schema())
    sensors = _stage("sensors", load_sensor_map, config.sensors)
    kg = _stage("kg", build_kg, model, sensors, schema)
    series = _stage("load", load_measurements, config.measurements, sensors)
    series = select_quantities(series, config.quantities)
    db = _stage("discretize", discretize, series, config.scheme)
    if config.mode == "baseline":
        mined = db
    else:
        mined = _stage("enrich", enrich_db, kg, db, config.enrichment)
    return Prepared(kg, db, mined)


def mine(prepared: Prepared, min_support: float, min_confidence: float) -> RuleSet:
    rules = _stage("mine", mine_rules, prepared.mined, min_support, min_confidence)
    return _stage("score", score_rules, rules, prepared.kg.schema)


def rule_record(rule: AssociationRule) -> dict:
    return {
        "antecedent": [str(i) for i in sorted(rule.antecedent, key=item_key)],
        "consequent": [str(i) for i in sorted(rule.consequent, key=item_key)],
        "support": rule.support,
        "confidence": rule.confidence,
        "semantic_expressivity": rule.semantic_expressivity,
    }


def render_rules(rules: RuleSet, fmt: str = "jsonl") -> str:
    records = [rule_record(r) for r in rules]
    if fmt == "jsonl":
        return "".join(json.dumps(rec) + "\n" for rec in records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["antecedent", "consequent", "support", "confidence", "semantic_expressivity"])
    for rec in records:
        writer.writerow([" & ".join(rec["antecedent"]), " & ".join(rec["consequent"]),
                         repr(rec["support"]), repr(rec["confidence"]), repr(rec["semantic_expressivity"])])
    return buf.getvalue()


class RuleRecord(NamedTuple):
    antecedent: frozenset
    consequent: frozenset
    support: float
    confidence: float
    semantic_expressivity: Optional[float]


def read_rules(path) -> list[RuleRecord]:
    """Read a rule file written by :func:`render_rules`; items stay as strings."""
    path = Path(path)
    text = path.read_text()
    if text.startswith("antecedent,"):
        rows = csv.DictReader(io.StringIO(text))
        return [RuleRecord(frozenset(r["antecedent"].split(" & ")), frozenset(r["consequent"].split(" & ")),
                           float(r["support"]), float(r["confidence"]),
                           None if r["semantic_expressivity"] == "None" else float(r["semantic_expressivity"]))
                for r in rows]
    out = []
    for line in text.splitlines():
        if line.strip():
            rec = json.loads(line)
            out.append(RuleRecord(frozenset(rec["antecedent"]), frozenset(rec["consequent"]),
                                  rec["support"], rec["confidence"], rec["semantic_expressivity"]))
    return out


def write_atomic(files: dict[Path, str]):
    """Write all files or none: each goes to a temp file first, then is renamed into place."""
    staged = []
    try:
        for path, content in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(content)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def stats_path(out: Path) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".stats.json")


def stats_artifact(config: RunConfig, rules: RuleSet) -> dict:
    return {
        "mode": config.mode,
        "k_neighbors": config.k_neighbors,
        "include_attributes": config.include_attributes,
        "min_support": rules.min_support,
        "min_confidence": rules.min_confidence,
        "n_transactions": rules.n_transactions,
        **ruleset_stats(rules).as_dict(),
    }


@dataclass
class PipelineResult:
    rules: RuleSet
    stats: dict
    prepared: Prepared


def run_pipeline(config: RunConfig) -> PipelineResult:
    prepared = prepare(config)
    rules = mine(prepared, config.min_support, config.min_confidence)
    stats = stats_artifact(config, rules)
    if config.out is not None:
        write_atomic({
            Path(config.out): render_rules(rules, config.fmt),
            stats_path(config.out): json.dumps(stats, indent=2) + "\n",
        })
    return PipelineResult(rules, stats, prepared)


@dataclass
class ComparisonReport:
    min_support: float
    min_confidence: float
    baseline_count: int
    semantic_count: int
    ratio: float
    max_se: Optional[float]
    min_se: Optional[float]

    def as_dict(self) -> dict:
        return dict(vars(self))


def compare(baseline: RuleSet, semantic: RuleSet) -> ComparisonReport:
    if (baseline.min_support, baseline.min_confidence) != (semantic.min_support, semantic.min_confidence):
        raise ValueError("rule sets were mined with different thresholds")
    if baseline.n_transactions != semantic.n_transactions:
        raise ValueError("rule sets come from databases of different size")
    b, s = len(baseline), len(semantic)
    ratio = s / b if b else (1.0 if s == 0 else float("inf"))
    st = ruleset_stats(semantic)
    return ComparisonReport(semantic.min_support, semantic.min_confidence, b, s, ratio, st.max_se, st.min_se)


@dataclass
class SweepRow:
    support: float
    rules: int
    max_se: Optional[float]
    min_se: Optional[float]
    baseline_rules: int


def sweep(config: RunConfig, supports: Sequence[float]) -> list[SweepRow]:
    """Semantic vs baseline rule counts across support thresholds at fixed confidence."""
    prepared = prepare(config)
    base = replace(prepared, mined=prepared.db)
    rows = []
    for support in supports:
        semantic = mine(prepared, support, config.min_confidence)
        baseline = mine(base, support, config.min_confidence)
        report = compare(baseline, semantic)
        rows.append(SweepRow(support, report.semantic_count, report.max_se, report.min_se,
                             report.baseline_count))
    return rows


@dataclass
class Violation:
    rule: object
    violations: int
    antecedent_count: int

    @property
    def rate(self) -> float:
        return self.violations / self.antecedent_count if self.antecedent_count else 0.0


def check_rules(rules: Iterable, db: Iterable[Iterable]) -> list[Violation]:
    """Per rule, the transactions where the antecedent holds but the consequent does not."""
    transactions = [frozenset(t) for t in db]
    out = []
    for rule in rules:
        ante = frozenset(rule.antecedent)
        cons = frozenset(rule.consequent)
        holds = [t for t in transactions if ante <= t]
        broken = sum(1 for t in holds if not cons <= t)
        out.append(Violation(rule, broken, len(holds)))
    out.sort(key=lambda v: -v.violations)
    return out
