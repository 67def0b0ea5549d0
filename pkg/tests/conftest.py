import json
from pathlib import Path

import pytest

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def demo3_paths():
    return {
        "scenario": SCENARIOS / "demo3.json",
        "late": SCENARIOS / "demo3_late.json",
        "dispatch": SCENARIOS / "demo3_dispatch.xml",
        "golden_export": SCENARIOS / "golden" / "finished_goods_demo3.xml",
        "golden_empty": SCENARIOS / "golden" / "finished_goods_empty.xml",
    }


@pytest.fixture()
def demo3_scenario(demo3_paths):
    from sfc.scenario import load_scenario_file
    return load_scenario_file(demo3_paths["scenario"])


@pytest.fixture()
def demo3_dispatch(demo3_paths):
    from sfc.erp_xml import parse_dispatch_xml
    return parse_dispatch_xml(demo3_paths["dispatch"].read_bytes())


@pytest.fixture(scope="session")
def shape_fixtures():
    path = Path(__file__).resolve().parent / "fixtures" / "api_shapes.json"
    return json.loads(path.read_text())


def drive_demo3(engine, scenario, *, until_us=None):
    """Feed a demo3-style engine directly from the world (no sockets)."""
    from sfc.scenario import World, apply_noise
    world = World(scenario)
    period = scenario.clock.cycle_period_us
    for tick in world.busy_cycle_times():
        if until_us is not None and tick > until_us:
            break
        cycle = (tick - scenario.clock.start_us) // period
        for ev in apply_noise(world.step(tick), scenario.noise, cycle):
            engine.ingest(ev, tick)
        engine.detect_delays(tick)
    if until_us is None:
        engine.detect_delays(scenario.end_us())


def check_shape(value, shape, path="$"):
    """Structural check: dict keys exact, list items homogeneous, scalar
    types from 'int|str|bool|float|null' unions."""
    if isinstance(shape, str):
        allowed = shape.split("|")
        if value is None:
            assert "null" in allowed, f"{path}: unexpected null"
            return
        if isinstance(value, bool):
            assert "bool" in allowed, f"{path}: unexpected bool"
            return
        type_names = {"int": int, "str": str, "float": (int, float)}
        assert any(isinstance(value, type_names[a]) for a in allowed
                   if a in type_names), \
            f"{path}: {type(value).__name__} not in {shape}"
        return
    if isinstance(shape, list):
        assert isinstance(value, list), f"{path}: expected list"
        for index, item in enumerate(value):
            check_shape(item, shape[0], f"{path}[{index}]")
        return
    assert isinstance(value, dict), f"{path}: expected object"
    assert set(value.keys()) == set(shape.keys()), \
        f"{path}: keys {sorted(value)} != {sorted(shape)}"
    for key, sub in shape.items():
        check_shape(value[key], sub, f"{path}.{key}")
