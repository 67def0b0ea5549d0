"""Straight-line prediction of a scenario's transition history.

Walks the script and the dispatch plan directly, without the world
simulator or the engine: for every dwell it computes the first read tick
from the approach geometry (a tag gliding toward an antenna enters the
read circle ``radius / speed`` seconds before it arrives) and folds the
forward-only routing rules by hand. Scenario runs are judged against
this prediction.

Assumptions that hold for the shipped fixtures: initial and staging
positions sit outside every read zone, and dwells of one tag do not
overlap in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dispatch import DispatchList, numeric_id
from .scenario import Scenario
from .tag_codec import BuildTicketData, ProductTagData

P, Q, D = "pending", "queued", "done"


@dataclass
class _Obs:
    """All reads of one tag inside one data point's zone."""
    ticks: list[int]
    dp_id: str
    dp_index: int
    tag_index: int


def _grid(value_us: float, start: int, period: int, up: bool) -> int:
    steps = (value_us - start) / period
    index = math.ceil(steps) if up else math.floor(steps)
    return start + max(0, index) * period


def _observations(scenario: Scenario) -> list[_Obs]:
    start = scenario.clock.start_us
    period = scenario.clock.cycle_period_us
    dp_index = {dp.data_point_id: i
                for i, dp in enumerate(scenario.data_points)}
    out: list[_Obs] = []
    for tag_index, tag in enumerate(scenario.tags):
        waypoints = [w for w in scenario.script if w.tag_ref == tag.ref]
        prev_time, prev_pos = start, tag.initial_xy
        for widx, wp in enumerate(waypoints):
            if wp.data_point_id is None:
                prev_time, prev_pos = wp.depart_us, wp.position
                continue
            dp = scenario.data_point(wp.data_point_id)
            radius = dp.read_radius_m
            dist_in = math.dist(prev_pos, dp.antenna_xy)
            gap_in = wp.arrive_us - prev_time
            if dist_in <= radius:
                entry = prev_time
            else:
                entry = wp.arrive_us - radius * gap_in / dist_in
            if widx + 1 < len(waypoints):
                nxt = waypoints[widx + 1]
                nxt_pos = (nxt.position if nxt.position is not None
                           else scenario.data_point(
                               nxt.data_point_id).antenna_xy)
                dist_out = math.dist(dp.antenna_xy, nxt_pos)
                gap_out = nxt.arrive_us - wp.depart_us
                if dist_out <= radius:
                    exit_ = nxt.arrive_us
                else:
                    exit_ = wp.depart_us + radius * gap_out / dist_out
            else:
                exit_ = wp.depart_us - 1  # off the floor at final depart
            first = _grid(entry, start, period, up=True)
            last = _grid(exit_, start, period, up=False)
            ticks = list(range(first, last + 1, period)) if last >= first \
                else []
            if ticks:
                out.append(_Obs(ticks, dp.data_point_id,
                                dp_index[dp.data_point_id], tag_index))
            prev_time, prev_pos = wp.depart_us, dp.antenna_xy
    return out


def predict_transitions(scenario: Scenario,
                        dispatch: DispatchList) -> list[dict]:
    """Expected (kind, at_us, ticket, seq, data_point) stream for a
    noise-free run of the scenario against the dispatch plan."""
    dp_wc = {dp.data_point_id: dp.work_center_id
             for dp in scenario.data_points}

    tickets: dict[int, dict] = {}
    order_products: dict[tuple[str, int, int], dict] = {}
    for order in dispatch.orders:
        route = dispatch.route(order.route_code)
        for code in order.ticket_codes:
            tickets[numeric_id(code)] = {
                "code": code, "steps": route.steps,
                "status": [P] * len(route.steps),
                "skipped": [False] * len(route.steps),
                "order": order.order_code, "exited": False,
            }
        key = (order.order_type.value, numeric_id(order.order_code),
               order.product_id)
        order_products[key] = {"order": order, "exited_serials": set()}

    # one event per (tick, dp, tag), in the engine's processing order
    events: list[tuple[int, int, int, _Obs, bool]] = []
    for obs in _observations(scenario):
        for i, tick in enumerate(obs.ticks):
            events.append((tick, obs.dp_index, obs.tag_index, obs, i == 0))
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    exit_dp = next((dp.data_point_id for dp in scenario.data_points
                    if dp.work_center_id == "WC-EXIT"), None)
    out: list[dict] = []

    def emit(kind, at, ticket=None, seq=None, dp=None):
        out.append({"kind": kind, "at_us": at, "ticket": ticket, "seq": seq,
                    "data_point": dp})

    for at, _, _, obs, first in events:
        tag = scenario.tags[obs.tag_index]
        payload = tag.payload
        if isinstance(payload, ProductTagData):
            if obs.dp_id != exit_dp:
                emit("OutOfRoute", at, dp=obs.dp_id)
                continue
            key = (payload.order.kind.value, payload.order.order_id,
                   payload.product_id)
            entry = order_products.get(key)
            if entry is None:
                continue  # unregistered: the engine will diverge, on purpose
            if payload.serial in entry["exited_serials"]:
                continue
            entry["exited_serials"].add(payload.serial)
            for code in entry["order"].ticket_codes:
                state = tickets[numeric_id(code)]
                frontier = next((i for i, s in enumerate(state["status"])
                                 if s == Q), None)
                if frontier is not None and \
                        frontier == len(state["steps"]) - 1:
                    emit("StartedOp", at, code, frontier + 1, obs.dp_id)
                    emit("CompletedOp", at, code, frontier + 1, obs.dp_id)
                    state["status"][frontier] = D
                if all(s == D or sk for s, sk in zip(state["status"],
                                                     state["skipped"])) \
                        and not state["exited"]:
                    state["exited"] = True
                    emit("Exited", at, code, dp=obs.dp_id)
            continue

        assert isinstance(payload, BuildTicketData)
        state = tickets.get(payload.ticket_id)
        if state is None:
            continue  # unregistered ticket: engine diverges, on purpose
        if obs.dp_id == exit_dp:
            emit("OutOfRoute", at, state["code"], dp=obs.dp_id)
            continue
        wc = dp_wc[obs.dp_id]
        seq = next((s.seq for s in state["steps"]
                    if s.work_center_id == wc), None)
        if seq is None:
            emit("OutOfRoute", at, state["code"], dp=obs.dp_id)
            continue
        idx = seq - 1
        if state["status"][idx] == D or state["skipped"][idx]:
            emit("StaleRead", at, state["code"], seq, obs.dp_id)
            continue
        if state["status"][idx] == Q:
            continue  # presence refresh
        if not first:
            # later read of the dwell that queued this step
            continue
        frontier = next((i for i, s in enumerate(state["status"])
                         if s == Q), None)
        if frontier is not None and frontier < idx:
            emit("StartedOp", at, state["code"], frontier + 1, obs.dp_id)
            emit("CompletedOp", at, state["code"], frontier + 1, obs.dp_id)
            state["status"][frontier] = D
        for i in range(idx):
            if state["status"][i] == P and not state["skipped"][i]:
                state["skipped"][i] = True
                emit("Skipped", at, state["code"], i + 1, obs.dp_id)
        state["status"][idx] = Q
        emit("Arrived", at, state["code"], seq, obs.dp_id)

    return out


def comparable(transition_dict: dict) -> tuple:
    return (transition_dict["kind"], transition_dict["at_us"],
            transition_dict.get("ticket"), transition_dict.get("seq"),
            transition_dict.get("data_point"))


def skeleton(transitions: list[dict]) -> dict[str, list[tuple]]:
    """Per-ticket Arrived/Exited sequence, timestamp-free."""
    out: dict[str, list[tuple]] = {}
    for t in transitions:
        if t["kind"] not in ("Arrived", "Exited") or t.get("ticket") is None:
            continue
        out.setdefault(t["ticket"], []).append((t["kind"], t.get("seq")))
    return out


def first_divergence(actual: list[dict],
                     expected: list[dict]) -> dict | None:
    """None if equal; otherwise the first differing position with both
    sides rendered."""
    for index, (a, e) in enumerate(zip(actual, expected)):
        if comparable(a) != comparable(e):
            return {"index": index, "actual": a, "expected": e}
    if len(actual) != len(expected):
        index = min(len(actual), len(expected))
        return {"index": index,
                "actual": actual[index] if index < len(actual) else None,
                "expected": expected[index] if index < len(expected) else None}
    return None
