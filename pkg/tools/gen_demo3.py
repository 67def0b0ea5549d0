#!/usr/bin/env python3
"""Regenerate the demo3 fixtures (scenario JSON, dispatch XML, late variant).

Floor layout: the 7 data points sit on a regular heptagon (circumradius
20 m) around a central staging spot, so every travel leg passes well
clear of every other read zone. Tags hop dwell -> stage -> dwell with
6-second legs, keeping the read-zone fringe around each dwell near one
second. The script asserts clearance and grid-margin safety before
writing anything.
"""

import json
import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
START = 1_362_556_800_000_000  # 2013-03-06 08:00:00 UTC
CYCLE = 500_000
RADIUS = 3.6
HEPTAGON_R = 20.0
LEG_S = 6  # seconds per travel leg
CENTER = (0.0, 0.0)

DP_NAMES = [
    ("DP-1", "WC-IN"), ("DP-2", "WC-CUT"), ("DP-3", "WC-ASM"),
    ("DP-4", "WC-PAINT"), ("DP-5", "WC-UPH"), ("DP-6", "WC-PACK"),
    ("DP-7", "WC-EXIT"),
]


def us(seconds: float) -> int:
    return START + int(round(seconds * 1_000_000))


def dp_positions():
    out = {}
    for i, (dp, wc) in enumerate(DP_NAMES):
        angle = 2 * math.pi * i / 7
        out[dp] = (round(HEPTAGON_R * math.cos(angle), 2),
                   round(HEPTAGON_R * math.sin(angle), 2), wc)
    return out


POS = dp_positions()


def dwell(tag, dp, arrive_s, depart_s):
    return {"tag": tag, "data_point": dp,
            "arrive_us": us(arrive_s), "depart_us": us(depart_s)}


def stage(tag, arrive_s, depart_s):
    return {"tag": tag, "position": list(CENTER),
            "arrive_us": us(arrive_s), "depart_us": us(depart_s)}


def ticket_script(tag, stops):
    """stops: [(dp, arrive_s, depart_s)] -> dwells with staging between."""
    script = []
    for i, (dp, arrive, depart) in enumerate(stops):
        script.append(dwell(tag, dp, arrive, depart))
        if i + 1 < len(stops):
            next_arrive = stops[i + 1][1]
            script.append(stage(tag, depart + LEG_S, next_arrive - LEG_S))
    return script


def build_scenario(late: bool):
    t2_pack = 4500 if late else 2760
    p2_exit = 4560 if late else 3710
    script = []
    script += ticket_script("T-1", [
        ("DP-1", 10, 14), ("DP-2", 330, 334), ("DP-3", 1230, 1234),
        ("DP-4", 2430, 2434), ("DP-6", 3630, 3634)])
    script += ticket_script("T-2", [
        ("DP-1", 25, 29), ("DP-2", 345, 349), ("DP-5", 1260, 1264),
        ("DP-6", t2_pack, t2_pack + 4)])
    script += ticket_script("T-3", [
        ("DP-1", 40, 44), ("DP-2", 360, 364), ("DP-3", 1290, 1294),
        ("DP-4", 2490, 2494), ("DP-6", 3690, 3694)])
    for tag, stage_in, exit_s in (("P-1", 10, 3700), ("P-2", 12, p2_exit),
                                  ("P-3", 14, 3720)):
        script.append(stage(tag, stage_in, exit_s - LEG_S))
        script.append(dwell(tag, "DP-7", exit_s, exit_s + 4))
    script.sort(key=lambda w: (w["arrive_us"], w["tag"]))

    tags = [
        {"tag": "T-1", "initial_xy": [45.0, 0.0],
         "payload": {"type": "build_ticket", "order_kind": "customer",
                     "order_id": 1001, "product_id": 77, "route_id": 1,
                     "ticket_id": 1}},
        {"tag": "T-2", "initial_xy": [45.0, 3.0],
         "payload": {"type": "build_ticket", "order_kind": "customer",
                     "order_id": 1002, "product_id": 77, "route_id": 2,
                     "ticket_id": 2}},
        {"tag": "T-3", "initial_xy": [45.0, -3.0],
         "payload": {"type": "build_ticket", "order_kind": "make-to-stock",
                     "order_id": 3001, "product_id": 88, "route_id": 1,
                     "ticket_id": 3}},
        {"tag": "P-1", "initial_xy": [0.0, 40.0],
         "payload": {"type": "product", "order_kind": "customer",
                     "order_id": 1001, "product_id": 77, "serial": 1}},
        {"tag": "P-2", "initial_xy": [2.0, 40.0],
         "payload": {"type": "product", "order_kind": "customer",
                     "order_id": 1002, "product_id": 77, "serial": 2}},
        {"tag": "P-3", "initial_xy": [4.0, 40.0],
         "payload": {"type": "product", "order_kind": "make-to-stock",
                     "order_id": 3001, "product_id": 88, "serial": 1}},
    ]
    data_points = [
        {"data_point_id": dp, "work_center_id": POS[dp][2],
         "antenna_xy": [POS[dp][0], POS[dp][1]], "antenna_height_m": 5.0,
         "read_radius_m": RADIUS, "listen_endpoint": "127.0.0.1:0",
         "frequency_khz": 866_300}
        for dp, _ in DP_NAMES
    ]
    return {
        "data_points": data_points,
        "tags": tags,
        "script": script,
        "noise": {"drop_probability": 0.0, "duplicate_probability": 0.0,
                  "rssi_mean_dbm": -60, "rssi_jitter_db": 0.0, "rng_seed": 0},
        "clock": {"start_us": START, "cycle_period_us": CYCLE},
    }


DISPATCH = f"""<?xml version="1.0" encoding="UTF-8"?>
<DispatchList date="2013-03-06" plant="MOBICA-1">
  <Route id="R-1">
    <Step seq="1" workCenter="WC-IN" plannedStart="{us(0)}" plannedEnd="{us(300)}"/>
    <Step seq="2" workCenter="WC-CUT" plannedStart="{us(300)}" plannedEnd="{us(1200)}"/>
    <Step seq="3" workCenter="WC-ASM" plannedStart="{us(1200)}" plannedEnd="{us(2400)}"/>
    <Step seq="4" workCenter="WC-PAINT" plannedStart="{us(2400)}" plannedEnd="{us(3600)}"/>
    <Step seq="5" workCenter="WC-PACK" plannedStart="{us(3600)}" plannedEnd="{us(4500)}"/>
  </Route>
  <Route id="R-2">
    <Step seq="1" workCenter="WC-IN" plannedStart="{us(0)}" plannedEnd="{us(300)}"/>
    <Step seq="2" workCenter="WC-CUT" plannedStart="{us(300)}" plannedEnd="{us(1200)}"/>
    <Step seq="3" workCenter="WC-UPH" plannedStart="{us(1260)}" plannedEnd="{us(2700)}"/>
    <Step seq="4" workCenter="WC-PACK" plannedStart="{us(4400)}" plannedEnd="{us(4500)}"/>
  </Route>
  <Order id="SO-1001" type="customer">
    <Product id="P-77" qty="4"/>
    <RouteRef id="R-1"/>
    <Ticket id="T-1"/>
  </Order>
  <Order id="SO-1002" type="customer">
    <Product id="P-77" qty="2"/>
    <RouteRef id="R-2"/>
    <Ticket id="T-2"/>
  </Order>
  <Order id="MO-3001" type="make-to-stock">
    <Product id="P-88" qty="1"/>
    <RouteRef id="R-1"/>
    <Ticket id="T-3"/>
  </Order>
</DispatchList>
"""


def check_geometry(doc):
    """Every travel leg must clear every non-endpoint read zone, and every
    dwell's zone-entry/exit must sit well off the cycle grid."""
    dps = {d["data_point_id"]: tuple(d["antenna_xy"])
           for d in doc["data_points"]}
    anchors = {}
    for tag in doc["tags"]:
        anchors[tag["tag"]] = [(START, tuple(tag["initial_xy"]))]
    for wp in doc["script"]:
        pos = dps[wp["data_point"]] if "data_point" in wp \
            else tuple(wp["position"])
        anchors[wp["tag"]].append((wp["arrive_us"], pos, wp.get("data_point")))
        anchors[wp["tag"]].append((wp["depart_us"], pos, wp.get("data_point")))

    def seg_dist(p, a, b):
        ax, ay = a
        bx, by = b
        px, py = p
        dx, dy = bx - ax, by - ay
        if dx == dy == 0:
            return math.hypot(px - ax, py - ay)
        t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy)
                         / (dx * dx + dy * dy)))
        return math.hypot(px - (ax + t * dx), py - (ay + t * dy))

    for tag, chain in anchors.items():
        for i in range(len(chain) - 1):
            t0, p0 = chain[i][0], chain[i][1]
            t1, p1 = chain[i + 1][0], chain[i + 1][1]
            if p0 == p1:
                continue  # a dwell, not a leg
            endpoints = {chain[i][2] if len(chain[i]) > 2 else None,
                         chain[i + 1][2] if len(chain[i + 1]) > 2 else None}
            for dp, xy in dps.items():
                if dp in endpoints:
                    continue
                clearance = seg_dist(xy, p0, p1)
                assert clearance > RADIUS + 0.1, \
                    f"{tag}: leg at {t0} passes {dp} at {clearance:.2f} m"
            # grid-margin safety on the endpoint zones
            for dp in endpoints - {None}:
                xy = dps[dp]
                dist = math.hypot(p0[0] - xy[0], p0[1] - xy[1]) or \
                    math.hypot(p1[0] - xy[0], p1[1] - xy[1])
                gap_s = (t1 - t0) / 1e6
                fringe = RADIUS * gap_s / dist if dist > RADIUS else gap_s
                for boundary in (t0 / 1e6 - fringe, t1 / 1e6 + fringe):
                    frac = (boundary * 1e6 - START / 1) % CYCLE / CYCLE
                    margin = min(frac, 1 - frac)
                    assert margin > 0.02, \
                        f"{tag}: zone boundary {boundary} within " \
                        f"{margin:.3f} cycles of the grid"


def main():
    for name, late in (("demo3.json", False), ("demo3_late.json", True)):
        doc = build_scenario(late)
        check_geometry(doc)
        path = ROOT / "scenarios" / name
        path.write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {path}")
    (ROOT / "scenarios" / "demo3_dispatch.xml").write_text(DISPATCH)
    print(f"wrote {ROOT / 'scenarios' / 'demo3_dispatch.xml'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
