"""End-to-end scenario runs over real sockets, judged by the oracle."""

import json

from sfc import oracle
from sfc.engine import TransitionKind
from sfc.runner import run_scenario
from sfc.scenario import NoiseModel, load_scenario

START = 1_362_556_800_000_000


def test_demo3_noise_free_matches_oracle(demo3_scenario, demo3_dispatch):
    report = run_scenario(demo3_scenario, demo3_dispatch)
    assert report["verdict"] == "pass"
    assert report["mode"] == "exact"
    assert report["first_divergence"] is None
    assert report["counts"]["transitions"] == \
        report["counts"]["oracle_transitions"]
    assert report["counts"]["alerts"] == 0
    assert report["counts"]["finished_goods"] == 3
    exited = [t for t in report["transitions"] if t["kind"] == "Exited"]
    assert {t["ticket"] for t in exited} == {"T-1", "T-2", "T-3"}


def test_reports_are_deterministic(demo3_scenario, demo3_dispatch):
    first = run_scenario(demo3_scenario, demo3_dispatch)
    second = run_scenario(demo3_scenario, demo3_dispatch)
    first.pop("generated_at")
    second.pop("generated_at")
    assert json.dumps(first, sort_keys=True) == \
        json.dumps(second, sort_keys=True)


def test_noise_seed42_passes_by_skeleton(demo3_scenario, demo3_dispatch):
    noisy = demo3_scenario.with_noise(
        NoiseModel(0.10, 0.20, -60, 2.0, 42))
    report = run_scenario(noisy, demo3_dispatch)
    assert report["verdict"] == "pass"
    assert report["mode"] == "skeleton"


def test_unregistered_ticket_diverges(demo3_scenario, demo3_dispatch,
                                      demo3_paths):
    doc = json.loads(demo3_paths["scenario"].read_text())
    doc["tags"].append({
        "tag": "T-GHOST", "initial_xy": [45.0, 8.0],
        "payload": {"type": "build_ticket", "order_kind": "customer",
                    "order_id": 9999, "product_id": 1, "route_id": 1,
                    "ticket_id": 99}})
    doc["script"].append({
        "tag": "T-GHOST", "data_point": "DP-2",
        "arrive_us": START + 100_000_000, "depart_us": START + 104_000_000})
    ghost = load_scenario(json.dumps(doc))
    report = run_scenario(ghost, demo3_dispatch)
    assert report["verdict"] == "fail"
    divergence = report["first_divergence"]
    assert divergence["actual"]["kind"] == "OutOfRoute"
    assert divergence["actual"]["detail"] == "unregistered ticket"


def test_late_variant_single_late_finish(demo3_paths, demo3_dispatch):
    from sfc.scenario import load_scenario_file
    late = load_scenario_file(demo3_paths["late"])
    report = run_scenario(late, demo3_dispatch)
    assert report["verdict"] == "pass"
    finishes = [a for a in report["alerts"] if a["kind"] == "LateFinish"]
    assert len(finishes) == 1
    assert (finishes[0]["ticket"], finishes[0]["seq"]) == ("T-2", 3)


def test_oracle_skeleton_shape(demo3_scenario, demo3_dispatch):
    expected = oracle.predict_transitions(demo3_scenario, demo3_dispatch)
    skel = oracle.skeleton(expected)
    assert skel["T-1"] == [("Arrived", 1), ("Arrived", 2), ("Arrived", 3),
                           ("Arrived", 4), ("Arrived", 5), ("Exited", None)]
    assert skel["T-2"] == [("Arrived", 1), ("Arrived", 2), ("Arrived", 3),
                           ("Arrived", 4), ("Exited", None)]


def test_history_is_time_ordered(demo3_scenario, demo3_dispatch):
    report = run_scenario(demo3_scenario, demo3_dispatch)
    times = [t["at_us"] for t in report["transitions"]]
    assert times == sorted(times)
    kinds = {t["kind"] for t in report["transitions"]}
    assert kinds <= {k.value for k in TransitionKind}
