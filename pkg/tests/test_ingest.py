import random
from collections import defaultdict
from datetime import datetime, timedelta, timezone
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semrl.ingest import (DiscretizationScheme, IngestError, MeasurementSeries, Record, discretize,
                          load_leakdb_directory, load_measurements, round_half_away, select_quantities)
from semrl.items import Measurement
from semrl.kg import SensorEntry, SensorMap
from semrl.synthetic import hanoi_sensors, synthetic_series

T0 = datetime(2023, 5, 1, tzinfo=timezone.utc)
SENSORS = SensorMap([SensorEntry("S1", "WaterPressureSensor", "J1", "pressure"),
                     SensorEntry("S2", "WaterConsumptionSensor", "J1", "demand")])


def _csv(tmp_path, rows, header="timestamp,sensor_id,value"):
    path = tmp_path / "m.csv"
    path.write_text(header + "\n" + "".join(",".join(r) + "\n" for r in rows))
    return path


def test_load_three_rows(tmp_path):
    path = _csv(tmp_path, [("2023-05-01T00:00:00Z", "S1", "1.5"),
                           ("2023-05-01T01:00:00", "S1", "2"),
                           ("2023-05-01T02:00:00+02:00", "S1", "3")])
    series = load_measurements(path, SENSORS)
    assert len(series) == 3
    assert all(r.timestamp.tzinfo == timezone.utc for r in series.records)
    assert series.quantities == {"S1": "pressure"}


def test_load_unknown_sensor(tmp_path):
    path = _csv(tmp_path, [("2023-05-01T00:00:00", "S7", "1")])
    with pytest.raises(IngestError, match="S7"):
        load_measurements(path, SENSORS)


@pytest.mark.parametrize("row", [("2023-05-01T00:00:00", "S1", "abc"),
                                 ("yesterday", "S1", "1"),
                                 ("2023-05-01T00:00:00", "S1", "inf")])
def test_load_bad_row_reports_line(tmp_path, row):
    path = _csv(tmp_path, [("2023-05-01T00:00:00", "S1", "1"), row])
    with pytest.raises(IngestError, match="line 3"):
        load_measurements(path, SENSORS)


def test_load_bad_header(tmp_path):
    with pytest.raises(IngestError, match="header"):
        load_measurements(_csv(tmp_path, [], header="time,id,v"), SENSORS)


def test_out_of_order_rows_sorted_stably(tmp_path):
    rng = random.Random(0)
    rows = [(T0 + timedelta(minutes=rng.randrange(0, 30)), rng.choice(["S1", "S2"]), f"{i}")
            for i in range(200)]
    path = _csv(tmp_path, [(t.isoformat(), s, v) for t, s, v in rows])
    series = load_measurements(path, SENSORS)
    # independent oracle: group by sensor in file order, then stable sort by time
    by_sensor = defaultdict(list)
    for t, s, v in rows:
        by_sensor[s].append((t, float(v)))
    expected = [(s, t, v) for s in sorted(by_sensor) for t, v in sorted(by_sensor[s], key=lambda tv: tv[0])]
    assert [(r.sensor_id, r.timestamp, r.value) for r in series.records] == expected


def test_leakdb_directory(tmp_path):
    (tmp_path / "Pressures").mkdir()
    (tmp_path / "Pressures" / "Node_1.csv").write_text(
        "Timestamp,Value\n2017-01-01 00:30,50.1\n2017-01-01 00:00,50.3\n")
    (tmp_path / "Demands").mkdir()
    (tmp_path / "Demands" / "Node_1.csv").write_text("Timestamp,Value\n2017-01-01 00:00,3.2\n")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text("file,sensor_id\nPressures/Node_1.csv,S1\nDemands/Node_1.csv,S2\n")
    series = load_leakdb_directory(tmp_path, manifest, SENSORS)
    assert len(series) == 3
    assert [r.value for r in series.records if r.sensor_id == "S1"] == [50.3, 50.1]


def _series(values_by_sensor_day):
    records = []
    for sensor, days in values_by_sensor_day.items():
        for day, values in days.items():
            for i, v in enumerate(values):
                records.append(Record(T0 + timedelta(days=day, hours=i), sensor, v))
    return MeasurementSeries(records, SENSORS.quantities())


def test_daily_mean_rounded():
    db = discretize(_series({"S1": {0: [42.6, 43.4]}}))
    assert len(db) == 1
    assert db[0].items == {Measurement("S1", "pressure", Decimal("43"))}


def test_silent_sensor_contributes_nothing():
    db = discretize(_series({"S1": {0: [1.0], 1: [2.0]}, "S2": {0: [5.0]}}))
    assert [len(t) for t in db] == [2, 1]
    assert db[1].window_start == T0 + timedelta(days=1)


def test_empty_windows_dropped():
    db = discretize(_series({"S1": {0: [1.0], 3: [2.0]}}))
    assert [t.window_start for t in db] == [T0, T0 + timedelta(days=3)]


def test_windows_start_at_midnight():
    series = MeasurementSeries([Record(T0 + timedelta(hours=20), "S1", 1.0),
                                Record(T0 + timedelta(hours=25), "S1", 3.0)], {"S1": "pressure"})
    db = discretize(series)
    assert [t.window_start for t in db] == [T0, T0 + timedelta(days=1)]
    six_hourly = discretize(series, DiscretizationScheme(window=timedelta(hours=6)))
    assert [t.window_start for t in six_hourly] == [T0 + timedelta(hours=18), T0 + timedelta(hours=24)]


@pytest.mark.parametrize("value, precision, expected", [
    (42.5, 0, "43"), (-42.5, 0, "-43"), (0.125, 2, "0.13"), (2.675, 2, "2.68"),
    (-0.4, 0, "0"), (1.05, 1, "1.1"), (7.0, 3, "7.000"),
])
def test_rounding_half_away_from_zero(value, precision, expected):
    assert str(round_half_away(value, precision)) == expected


def test_empty_series_rejected():
    with pytest.raises(IngestError):
        discretize(MeasurementSeries([]))


def test_scheme_validation():
    with pytest.raises(ValueError):
        DiscretizationScheme(window=timedelta(0))
    with pytest.raises(ValueError):
        DiscretizationScheme(precision=-1)
    with pytest.raises(ValueError):
        DiscretizationScheme(attribute_bins=0)


def test_select_quantities():
    series = _series({"S1": {0: [1.0]}, "S2": {0: [2.0]}})
    assert select_quantities(series, ["demand"]).sensors() == ["S2"]
    assert select_quantities(series, None) is series


def test_year_of_65_sensors():
    series = synthetic_series(hanoi_sensors())
    db = discretize(series)
    # independent group-by over (sensor, day) pairs
    pairs = {(r.sensor_id, (r.timestamp - T0.replace(month=1)).days) for r in series.records}
    assert len(db) == 365
    assert all(len(t) <= 65 for t in db)
    assert sum(len(t) for t in db) == len(pairs)


@st.composite
def record_sets(draw):
    n = draw(st.integers(1, 40))
    return [Record(T0 + timedelta(hours=draw(st.integers(0, 96))), draw(st.sampled_from(["S1", "S2"])),
                   draw(st.floats(-1e3, 1e3, allow_nan=False)))
            for _ in range(n)]


@given(record_sets(), st.randoms(use_true_random=False))
def test_permutation_invariant(records, rnd):
    shuffled = records[:]
    rnd.shuffle(shuffled)
    a = discretize(MeasurementSeries(records, SENSORS.quantities()))
    b = discretize(MeasurementSeries(shuffled, SENSORS.quantities()))
    assert a == b


@given(record_sets())
def test_item_count_equals_sensor_window_pairs(records):
    db = discretize(MeasurementSeries(records, SENSORS.quantities()))
    origin = min(r.timestamp for r in records).replace(hour=0)
    pairs = {(r.sensor_id, (r.timestamp - origin) // timedelta(days=1)) for r in records}
    assert sum(len(t) for t in db) == len(pairs)


@given(record_sets(), st.integers(0, 3))
def test_more_precision_never_fewer_levels(records, precision):
    series = MeasurementSeries(records, SENSORS.quantities())

    def levels(p):
        return {(i.subject, i.level) for t in discretize(series, DiscretizationScheme(precision=p)) for i in t}
    assert len(levels(precision + 1)) >= len(levels(precision))


@pytest.mark.slow
def test_leakdb_scale_load(tmp_path):
    # 98 sensors x 17520 half-hourly steps = 1,716,960 rows
    sensors = SensorMap([SensorEntry(f"S{i}", "WaterPressureSensor", "J1", "pressure") for i in range(98)])
    stamps = [(T0 + timedelta(minutes=30 * j)).isoformat() for j in range(17520)]
    values = np.round(np.random.default_rng(0).normal(50, 5, 17520), 3).astype(str)
    path = tmp_path / "big.csv"
    with open(path, "w") as fh:
        fh.write("timestamp,sensor_id,value\n")
        for i in range(98):
            sid = f"S{i}"
            fh.writelines(f"{t},{sid},{v}\n" for t, v in zip(stamps, values))
    series = load_measurements(path, sensors)
    assert len(series) == 1_716_960
