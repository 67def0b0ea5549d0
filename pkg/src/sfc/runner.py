"""Scripted end-to-end runs: simulators, LLRP links and the engine in one
process on a logical clock.

The runner owns the cycle loop. Each busy tick it advances the plant,
waits until every read pushed onto the wire has come back through the
controller links, then applies the cycle's reads to the engine in a
canonical order (data point, then report position). That keeps the full
TCP/LLRP path in play while making the transition history byte-stable
across runs, so it can be compared against the script oracle
transition-for-transition.
"""

from __future__ import annotations

import asyncio
import time
from dataclasses import dataclass, field

from . import oracle
from .controller import ControllerLink
from .dispatch import DispatchList
from .engine import SfcEngine
from .llrp import ReadEvent
from .reader_sim import SimPlant
from .scenario import Scenario

EXIT_WORK_CENTER = "WC-EXIT"
CYCLE_SETTLE_TIMEOUT_S = 10.0


class RunnerError(Exception):
    pass


@dataclass
class _Collector:
    """Receives reads from all links and releases them per cycle."""
    dp_order: dict[str, int]
    received: list[tuple[int, int, ReadEvent]] = field(default_factory=list)
    total: int = 0
    _event: asyncio.Event = field(default_factory=asyncio.Event)

    def deliver(self, dp_id: str, reads: list[ReadEvent]) -> None:
        for position, ev in enumerate(reads):
            self.received.append((self.dp_order[dp_id], position, ev))
        self.total += len(reads)
        self._event.set()

    async def wait_for_total(self, expected: int) -> None:
        deadline = time.monotonic() + CYCLE_SETTLE_TIMEOUT_S
        while self.total < expected:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise RunnerError(
                    f"cycle settle timeout: expected {expected} reads, "
                    f"got {self.total}")
            self._event.clear()
            try:
                await asyncio.wait_for(self._event.wait(), remaining)
            except asyncio.TimeoutError:
                continue

    def drain_sorted(self) -> list[ReadEvent]:
        batch = sorted(self.received, key=lambda item: (item[0], item[1]))
        self.received.clear()
        return [ev for _, _, ev in batch]


async def run_scenario_async(scenario: Scenario, dispatch: DispatchList,
                             *, log_path=None) -> dict:
    """Run the script to completion; returns the run report."""
    dp_map = {dp.data_point_id: dp.work_center_id
              for dp in scenario.data_points}
    exit_dp = next((dp.data_point_id for dp in scenario.data_points
                    if dp.work_center_id == EXIT_WORK_CENTER), None)
    engine = SfcEngine(dp_map, exit_data_point_id=exit_dp,
                       log_path=log_path)
    engine.import_dispatch(dispatch)

    plant = SimPlant(scenario)
    await plant.start()
    collector = _Collector({dp.data_point_id: index for index, dp
                            in enumerate(scenario.data_points)})
    links = [
        ControllerLink("127.0.0.1", plant.servers[dp.data_point_id].port,
                       dp.data_point_id, collector.deliver)
        for dp in scenario.data_points
    ]
    tasks = [asyncio.create_task(link.run()) for link in links]
    try:
        await asyncio.wait_for(
            asyncio.gather(*(link.started.wait() for link in links)),
            timeout=CYCLE_SETTLE_TIMEOUT_S)

        expected_total = 0
        for tick in plant.world.busy_cycle_times():
            delivered = plant.step_cycle(tick)
            expected_total += sum(len(v) for v in delivered.values())
            await collector.wait_for_total(expected_total)
            for ev in collector.drain_sorted():
                engine.ingest(ev, tick)
            engine.detect_delays(tick)
        engine.detect_delays(scenario.end_us())
    finally:
        for link in links:
            await link.close()
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        await plant.close()

    return build_report(scenario, dispatch, engine)


def build_report(scenario: Scenario, dispatch: DispatchList,
                 engine: SfcEngine) -> dict:
    actual = [t.to_dict() for t in engine.history]
    expected = oracle.predict_transitions(scenario, dispatch)
    noise_free = (scenario.noise.drop_probability == 0.0
                  and scenario.noise.duplicate_probability == 0.0)
    if noise_free:
        mode = "exact"
        divergence = oracle.first_divergence(actual, expected)
        passed = divergence is None
    else:
        mode = "skeleton"
        divergence = None
        passed = oracle.skeleton(actual) == oracle.skeleton(expected)
        if not passed:
            divergence = {"actual_skeleton": oracle.skeleton(actual),
                          "expected_skeleton": oracle.skeleton(expected)}
    return {
        "verdict": "pass" if passed else "fail",
        "mode": mode,
        "counts": {
            "transitions": len(actual),
            "oracle_transitions": len(expected),
            "alerts": len(engine.alerts),
            "finished_goods": len(engine.finished),
            "quarantined": len(engine.quarantine),
        },
        "first_divergence": divergence,
        "transitions": actual,
        "alerts": [a.to_dict() for a in engine.alerts],
        "finished_goods": [r.to_dict() for r in engine.finished],
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def run_scenario(scenario: Scenario, dispatch: DispatchList,
                 *, log_path=None) -> dict:
    return asyncio.run(run_scenario_async(scenario, dispatch,
                                          log_path=log_path))
