"""Synthetic year-long fixture on the Hanoi benchmark layout.

The layout (31 junctions, 1 reservoir, 34 pipes) follows the classic Hanoi
network. Sensor readings are synthetic: most sensors wander randomly from
day to day, while two small groups track shared drivers (a summer season and
weekends), which is what produces cross-sensor rules.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .ingest import MeasurementSeries, Record
from .inp import Junction, NetworkModel, Pipe, Reservoir, to_inp
from .kg import SensorEntry, SensorMap

# (pipe, from node, to node, length m); node 1 is the reservoir
HANOI_PIPES = [
    (1, 1, 2, 100), (2, 2, 3, 1350), (3, 3, 4, 900), (4, 4, 5, 1150), (5, 5, 6, 1450),
    (6, 6, 7, 450), (7, 7, 8, 850), (8, 8, 9, 850), (9, 9, 10, 800), (10, 10, 11, 950),
    (11, 11, 12, 1200), (12, 12, 13, 3500), (13, 10, 14, 800), (14, 14, 15, 500),
    (15, 15, 16, 550), (16, 16, 17, 2730), (17, 17, 18, 1750), (18, 18, 19, 800),
    (19, 19, 3, 400), (20, 3, 20, 2200), (21, 20, 21, 1500), (22, 21, 22, 500),
    (23, 20, 23, 2650), (24, 23, 24, 1230), (25, 24, 25, 1300), (26, 25, 26, 850),
    (27, 26, 27, 300), (28, 27, 16, 750), (29, 23, 28, 1500), (30, 28, 29, 2000),
    (31, 29, 30, 1600), (32, 30, 31, 150), (33, 31, 32, 860), (34, 32, 25, 950),
]
# base demand (m3/h) for nodes 2..32
HANOI_DEMANDS = [890, 850, 130, 725, 1005, 1350, 550, 525, 525, 500, 560, 940, 615, 280, 310,
                 865, 1345, 60, 1275, 930, 485, 1045, 820, 170, 900, 370, 290, 360, 360, 105, 805]
# pipe diameters (mm) from one published least-cost design
HANOI_DIAMETERS = [1016, 1016, 1016, 1016, 1016, 1016, 1016, 1016, 1016, 762, 609.6, 609.6,
                   508, 406.4, 304.8, 304.8, 406.4, 508, 508, 1016, 508, 304.8, 1016, 762,
                   762, 508, 304.8, 304.8, 406.4, 304.8, 304.8, 304.8, 406.4, 508]

FLOW_PIPES = ("P1", "P12", "P21")
SEASON_GROUP = ("PS_J5", "CS_J5", "FS_P1")
WEEKEND_GROUP = ("PS_J20", "CS_J20")


def hanoi_model() -> NetworkModel:
    model = NetworkModel(title="Hanoi layout (synthetic attributes)")
    model.reservoirs.append(Reservoir("R1", 100.0))
    for node, demand in zip(range(2, 33), HANOI_DEMANDS):
        model.junctions.append(Junction(f"J{node}", 0.0, float(demand)))
    node_id = lambda n: "R1" if n == 1 else f"J{n}"  # noqa: E731
    for (pid, a, b, length), diam in zip(HANOI_PIPES, HANOI_DIAMETERS):
        model.pipes.append(Pipe(f"P{pid}", node_id(a), node_id(b), float(length), float(diam), 130.0))
    return model


def hanoi_sensors() -> SensorMap:
    entries = []
    for node in range(2, 33):
        entries.append(SensorEntry(f"PS_J{node}", "WaterPressureSensor", f"J{node}", "pressure"))
        entries.append(SensorEntry(f"CS_J{node}", "WaterConsumptionSensor", f"J{node}", "demand"))
    for pipe in FLOW_PIPES:
        entries.append(SensorEntry(f"FS_{pipe}", "FlowSensor", pipe, "flow"))
    return SensorMap(entries)


@dataclass(frozen=True)
class FixtureSpec:
    days: int = 365
    samples_per_day: int = 24
    seed: int = 7
    start: datetime = datetime(2023, 1, 1, tzinfo=timezone.utc)
    summer: tuple[int, int] = (150, 278)   # day range of the high-demand season
    noise_sd: float = 3.0                  # day-to-day wander of unlinked sensors
    spacing: float = 25.0                  # gap between unlinked sensors' base levels


def daily_levels(sensors: SensorMap, spec: FixtureSpec) -> dict[str, np.ndarray]:
    """Target daily mean per sensor."""
    rng = np.random.default_rng(spec.seed)
    days = np.arange(spec.days)
    summer = (days >= spec.summer[0]) & (days < spec.summer[1])
    weekend = (spec.start.weekday() + days) % 7 >= 5
    levels = {}
    for i, s in enumerate(sorted(e.sensor_id for e in sensors)):
        base = 40.0 + spec.spacing * i
        if s in SEASON_GROUP:
            levels[s] = base + 6.0 * summer
        elif s in WEEKEND_GROUP:
            levels[s] = base - 4.0 * weekend
        else:
            levels[s] = base + rng.normal(0.0, spec.noise_sd, spec.days)
    return levels


def synthetic_series(sensors: SensorMap | None = None, spec: FixtureSpec = FixtureSpec()) -> MeasurementSeries:
    sensors = sensors or hanoi_sensors()
    rng = np.random.default_rng(spec.seed + 1)
    step = timedelta(days=1) / spec.samples_per_day
    phase = np.sin(2 * np.pi * np.arange(spec.samples_per_day) / spec.samples_per_day)
    stamps = [spec.start + j * step for j in range(spec.days * spec.samples_per_day)]
    records = []
    for sensor_id, daily in daily_levels(sensors, spec).items():
        # diurnal swing averages out within a day; jitter is small against the rounding step
        values = np.repeat(daily, spec.samples_per_day) + np.tile(2.0 * phase, spec.days)
        values += rng.normal(0.0, 0.2, values.size)
        records.extend(Record(ts, sensor_id, float(v)) for ts, v in zip(stamps, values))
    records.sort(key=lambda r: (r.sensor_id, r.timestamp))
    return MeasurementSeries(records, sensors.quantities())


def write_fixture(directory, spec: FixtureSpec = FixtureSpec()) -> dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"inp": directory / "hanoi.inp", "sensors": directory / "sensors.csv",
             "measurements": directory / "measurements.csv"}
    paths["inp"].write_text(to_inp(hanoi_model()))
    sensors = hanoi_sensors()
    with open(paths["sensors"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sensor_id", "sensor_class", "host_component", "quantity"])
        for e in sensors:
            w.writerow([e.sensor_id, e.sensor_class, e.host_component, e.quantity])
    series = synthetic_series(sensors, spec)
    with open(paths["measurements"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "sensor_id", "value"])
        for r in series.records:
            w.writerow([r.timestamp.isoformat(), r.sensor_id, f"{r.value:.3f}"])
    return paths
