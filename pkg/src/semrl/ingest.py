"""Measurement loading and windowed discretization into transactions."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

from .items import Measurement, item_key
from .kg import SensorMap


class IngestError(ValueError):
    pass


class Record(NamedTuple):
    timestamp: datetime
    sensor_id: str
    value: float


@dataclass
class MeasurementSeries:
    records: list[Record]
    quantities: dict[str, str] = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def sensors(self) -> list[str]:
        return sorted({r.sensor_id for r in self.records})


@dataclass(frozen=True)
class DiscretizationScheme:
    window: timedelta = timedelta(hours=24)
    precision: int = 0
    attribute_bins: int = 5
    aggregate: str = "mean"

    def __post_init__(self):
        if self.window <= timedelta(0):
            raise ValueError("window must be positive")
        if self.precision < 0:
            raise ValueError("precision must be >= 0")
        if self.attribute_bins < 1:
            raise ValueError("attribute_bins must be >= 1")
        if self.aggregate != "mean":
            raise ValueError("only the mean aggregate is supported")


@dataclass(frozen=True)
class Transaction:
    window_start: datetime
    items: frozenset

    def __post_init__(self):
        object.__setattr__(self, "items", frozenset(self.items))
        if not self.items:
            raise ValueError("transactions must be non-empty")

    def __iter__(self) -> Iterator:
        return iter(sorted(self.items, key=item_key))

    def __len__(self):
        return len(self.items)

    def __contains__(self, item):
        return item in self.items

    def sensor_list(self) -> list[str]:
        return sorted({i.subject for i in self.items if isinstance(i, Measurement)})


TransactionDB = list[Transaction]


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _finish(records: list[Record], sensors: SensorMap) -> MeasurementSeries:
    records.sort(key=lambda r: (r.sensor_id, r.timestamp))
    quantities = sensors.quantities()
    present = {r.sensor_id for r in records}
    return MeasurementSeries(records, {s: q for s, q in quantities.items() if s in present})


def _parse_value(text, where: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise IngestError(f"{where}: value {text!r} is not numeric") from None
    if not math.isfinite(value):
        raise IngestError(f"{where}: value {text!r} is not finite")
    return value


def load_measurements(path, sensors: SensorMap) -> MeasurementSeries:
    """Load a ``timestamp,sensor_id,value`` CSV.

    Records come back sorted per sensor by time (stable for equal stamps).
    """
    known = sensors.quantities()
    records: list[Record] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["timestamp", "sensor_id", "value"]:
            raise IngestError(f"{path}: header must be timestamp,sensor_id,value")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path} line {lineno}"
            if len(row) != 3:
                raise IngestError(f"{where}: expected 3 fields, got {len(row)}")
            ts_text, sensor_id, value_text = row
            if sensor_id not in known:
                raise IngestError(f"{where}: unknown sensor_id {sensor_id!r}")
            try:
                ts = parse_timestamp(ts_text)
            except ValueError:
                raise IngestError(f"{where}: bad timestamp {ts_text!r}") from None
            records.append(Record(ts, sensor_id, _parse_value(value_text, where)))
    return _finish(records, sensors)


def load_leakdb_directory(directory, manifest, sensors: SensorMap) -> MeasurementSeries:
    """Load per-sensor files (LeakDB layout) listed in a manifest CSV.

    The manifest has header ``file,sensor_id`` with file paths relative to
    ``directory``. Each data file has a timestamp column and a value column
    (header row required, e.g. ``Timestamp,Value``).
    """
    directory = Path(directory)
    known = sensors.quantities()
    records: list[Record] = []
    with open(manifest, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for entry in rows:
        sensor_id = entry["sensor_id"].strip()
        if sensor_id not in known:
            raise IngestError(f"{manifest}: unknown sensor_id {sensor_id!r}")
        data_path = directory / entry["file"].strip()
        with open(data_path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                where = f"{data_path} line {lineno}"
                if len(row) < 2:
                    raise IngestError(f"{where}: expected timestamp,value")
                try:
                    ts = parse_timestamp(row[0])
                except ValueError:
                    raise IngestError(f"{where}: bad timestamp {row[0]!r}") from None
                records.append(Record(ts, sensor_id, _parse_value(row[1], where)))
    return _finish(records, sensors)


def select_quantities(series: MeasurementSeries, quantities: Iterable[str] | None) -> MeasurementSeries:
    if not quantities:
        return series
    wanted = set(quantities)
    keep = {s for s, q in series.quantities.items() if q in wanted}
    return MeasurementSeries([r for r in series.records if r.sensor_id in keep],
                             {s: q for s, q in series.quantities.items() if s in keep})


def round_half_away(value: float, precision: int) -> Decimal:
    quantum = Decimal(1).scaleb(-precision)
    level = Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)
    return level.copy_abs() if level.is_zero() else level


def discretize(series: MeasurementSeries, scheme: DiscretizationScheme | None = None) -> TransactionDB:
    """Average each sensor over fixed windows and round to ``scheme.precision``.

    Windows start at midnight UTC of the earliest timestamp. A sensor with no
    record in a window contributes nothing to it; empty windows are dropped.
    """
    scheme = scheme or DiscretizationScheme()
    if not series.records:
        raise IngestError("cannot discretize an empty series")
    first = min(r.timestamp for r in series.records)
    origin = first.replace(hour=0, minute=0, second=0, microsecond=0)

    buckets: dict[int, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in series.records:
        idx = (r.timestamp - origin) // scheme.window
        buckets[idx][r.sensor_id].append(r.value)

    db: TransactionDB = []
    for idx in sorted(buckets):
        items = []
        for sensor_id, values in buckets[idx].items():
            mean = math.fsum(values) / len(values)
            quantity = series.quantities.get(sensor_id, "value")
            items.append(Measurement(sensor_id, quantity, round_half_away(mean, scheme.precision)))
        db.append(Transaction(origin + idx * scheme.window, frozenset(items)))
    return db


def transactions_as_sets(db: Sequence[Transaction]) -> list[frozenset]:
    return [t.items for t in db]
