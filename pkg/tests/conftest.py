from pathlib import Path

import pytest
from hypothesis import settings

from semrl.inp import Junction, NetworkModel, Pipe, Reservoir
from semrl.kg import SensorEntry, SensorMap, build_kg

settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("dev", max_examples=30, deadline=None)
settings.load_profile("dev")

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def toy_paths():
    toy = DATA / "toy"
    return {"inp": toy / "network.inp", "sensors": toy / "sensors.csv",
            "measurements": toy / "measurements.csv"}


def star_model() -> NetworkModel:
    """J1 with pipes A, B, C incident; the far ends are J2, J3 and reservoir R1."""
    return NetworkModel(
        junctions=[Junction("J1", 12.0, 3.5), Junction("J2", 10.0, 1.0), Junction("J3", 15.5, 2.0)],
        reservoirs=[Reservoir("R1", 60.0)],
        pipes=[Pipe("A", "R1", "J1", 500.0, 300.0, 100.0),
               Pipe("B", "J1", "J2", 250.0, 200.0, 110.0),
               Pipe("C", "J1", "J3", 400.0, 150.0, 120.0)],
    )


@pytest.fixture
def star():
    return star_model()


@pytest.fixture
def star_kg():
    sensors = SensorMap([SensorEntry("WPS", "WaterPressureSensor", "J1", "pressure"),
                         SensorEntry("WCS", "WaterConsumptionSensor", "J2", "demand")])
    return build_kg(star_model(), sensors)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
