"""Scripted shop-floor world: data points, tag movements and RF noise.

A scenario file is a JSON document with top-level keys ``data_points``,
``tags``, ``script``, ``noise`` and ``clock``:

    {
      "data_points": [{"data_point_id": "DP-1", "work_center_id": "WC-IN",
                       "antenna_xy": [20.0, 0.0], "antenna_height_m": 5.0,
                       "read_radius_m": 3.6, "listen_endpoint": "127.0.0.1:0",
                       "frequency_khz": 866300}, ...],
      "tags": [{"tag": "T-1", "initial_xy": [45.0, 0.0],
                "payload": {"type": "build_ticket", "order_kind": "customer",
                            "order_id": 1001, "product_id": 77,
                            "route_id": 1, "ticket_id": 1}}, ...],
      "script": [{"tag": "T-1", "data_point": "DP-1",
                  "arrive_us": ..., "depart_us": ...},
                 {"tag": "T-1", "position": [0.0, 0.0],
                  "arrive_us": ..., "depart_us": ...}, ...],
      "noise": {"drop_probability": 0.0, "duplicate_probability": 0.0,
                "rssi_mean_dbm": -60, "rssi_jitter_db": 0.0, "rng_seed": 0},
      "clock": {"start_us": ..., "cycle_period_us": 500000, "end_us": ...}
    }

A tag dwells at a waypoint's position between arrive and depart and moves
in a straight line between consecutive waypoints; before the first
waypoint it sits at its initial position and once the last waypoint
departs it leaves the floor. A data point reads every tag within its
read-radius circle once per read cycle.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field, replace

from . import tag_codec
from .llrp import ReadEvent
from .tag_codec import BuildTicketData, OrderKind, OrderRef, ProductTagData

FREQ_MIN_KHZ = 865_700
FREQ_MAX_KHZ = 867_500
DEFAULT_CYCLE_PERIOD_US = 500_000
DEFAULT_ANTENNA_HEIGHT_M = 5.0
DEFAULT_READ_RADIUS_M = 3.6
DEFAULT_FREQUENCY_KHZ = 866_300


class ScenarioError(Exception):
    pass


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError):
    pass


class BandError(ValidationError):
    pass


class ClockRegression(ScenarioError):
    pass


@dataclass(frozen=True)
class DataPointConfig:
    data_point_id: str
    work_center_id: str
    antenna_xy: tuple[float, float]
    antenna_height_m: float = DEFAULT_ANTENNA_HEIGHT_M
    read_radius_m: float = DEFAULT_READ_RADIUS_M
    listen_endpoint: str = "127.0.0.1:0"
    frequency_khz: int = DEFAULT_FREQUENCY_KHZ

    def __post_init__(self):
        if self.read_radius_m <= 0:
            raise ValidationError(
                f"{self.data_point_id}: read_radius_m must be positive")
        if not FREQ_MIN_KHZ <= self.frequency_khz <= FREQ_MAX_KHZ:
            raise BandError(
                f"{self.data_point_id}: {self.frequency_khz} kHz outside "
                f"permitted band {FREQ_MIN_KHZ}-{FREQ_MAX_KHZ} kHz")


@dataclass(frozen=True)
class NoiseModel:
    drop_probability: float = 0.0
    duplicate_probability: float = 0.0
    rssi_mean_dbm: int = -60
    rssi_jitter_db: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("drop_probability", "duplicate_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"noise.{name} must be within [0,1]")
        if self.rssi_jitter_db < 0:
            raise ValidationError("noise.rssi_jitter_db must be >= 0")


@dataclass(frozen=True)
class TagSpec:
    ref: str
    payload: BuildTicketData | ProductTagData
    initial_xy: tuple[float, float]
    epc: bytes  # 64-octet image produced by tag_codec at load time


@dataclass(frozen=True)
class Waypoint:
    tag_ref: str
    arrive_us: int
    depart_us: int
    data_point_id: str | None = None
    position: tuple[float, float] | None = None


@dataclass(frozen=True)
class ClockConfig:
    start_us: int
    cycle_period_us: int = DEFAULT_CYCLE_PERIOD_US
    end_us: int | None = None


@dataclass(frozen=True)
class Scenario:
    data_points: list[DataPointConfig]
    tags: list[TagSpec]
    script: list[Waypoint]
    noise: NoiseModel
    clock: ClockConfig

    def data_point(self, dp_id: str) -> DataPointConfig:
        for dp in self.data_points:
            if dp.data_point_id == dp_id:
                return dp
        raise KeyError(dp_id)

    def end_us(self) -> int:
        if self.clock.end_us is not None:
            return self.clock.end_us
        last = max((w.depart_us for w in self.script),
                   default=self.clock.start_us)
        return last + self.clock.cycle_period_us

    def with_noise(self, noise: NoiseModel) -> "Scenario":
        return replace(self, noise=noise)


def in_read_zone(tag_xy: tuple[float, float], dp: DataPointConfig) -> bool:
    """True iff the planar distance to the antenna is within the radius."""
    dx = tag_xy[0] - dp.antenna_xy[0]
    dy = tag_xy[1] - dp.antenna_xy[1]
    return math.hypot(dx, dy) <= dp.read_radius_m


# --- scenario loading -------------------------------------------------------


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ParseError(f"{where}: missing field {key!r}")
    return mapping[key]


def _xy(value, where: str) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise ParseError(f"{where}: expected [x, y] pair, got {value!r}")
    return float(value[0]), float(value[1])


_ORDER_KINDS = {k.value: k for k in OrderKind}


def _parse_payload(doc: dict, where: str) -> BuildTicketData | ProductTagData:
    kind = _require(doc, "type", where)
    order_kind = _ORDER_KINDS.get(_require(doc, "order_kind", where))
    if order_kind is None:
        raise ParseError(f"{where}: order_kind must be one of "
                         f"{sorted(_ORDER_KINDS)}")
    order = OrderRef(order_kind, int(_require(doc, "order_id", where)))
    product_id = int(_require(doc, "product_id", where))
    if kind == "build_ticket":
        return BuildTicketData(order, product_id,
                               int(_require(doc, "route_id", where)),
                               int(_require(doc, "ticket_id", where)))
    if kind == "product":
        return ProductTagData(order, product_id,
                              int(_require(doc, "serial", where)))
    raise ParseError(f"{where}: payload type must be build_ticket or product")


def load_scenario(source: str) -> Scenario:
    """Parse and validate a scenario document (JSON text)."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")

    data_points = []
    seen_dp = set()
    for i, entry in enumerate(_require(doc, "data_points", "scenario")):
        where = f"data_points[{i}]"
        dp = DataPointConfig(
            data_point_id=_require(entry, "data_point_id", where),
            work_center_id=_require(entry, "work_center_id", where),
            antenna_xy=_xy(_require(entry, "antenna_xy", where), where),
            antenna_height_m=float(entry.get("antenna_height_m",
                                             DEFAULT_ANTENNA_HEIGHT_M)),
            read_radius_m=float(entry.get("read_radius_m",
                                          DEFAULT_READ_RADIUS_M)),
            listen_endpoint=entry.get("listen_endpoint", "127.0.0.1:0"),
            frequency_khz=int(entry.get("frequency_khz",
                                        DEFAULT_FREQUENCY_KHZ)),
        )
        if dp.data_point_id in seen_dp:
            raise ValidationError(f"{where}: duplicate data point "
                                  f"{dp.data_point_id}")
        seen_dp.add(dp.data_point_id)
        data_points.append(dp)

    tags = []
    seen_tags = set()
    for i, entry in enumerate(_require(doc, "tags", "scenario")):
        where = f"tags[{i}]"
        ref = _require(entry, "tag", where)
        if ref in seen_tags:
            raise ValidationError(f"{where}: duplicate tag {ref}")
        seen_tags.add(ref)
        payload = _parse_payload(_require(entry, "payload", where),
                                 f"{where}.payload")
        if isinstance(payload, BuildTicketData):
            epc = tag_codec.encode_build_ticket(payload)
        else:
            epc = tag_codec.encode_product_tag(payload)
        tags.append(TagSpec(ref, payload,
                            _xy(_require(entry, "initial_xy", where), where),
                            epc))

    clock_doc = _require(doc, "clock", "scenario")
    clock = ClockConfig(
        start_us=int(_require(clock_doc, "start_us", "clock")),
        cycle_period_us=int(clock_doc.get("cycle_period_us",
                                          DEFAULT_CYCLE_PERIOD_US)),
        end_us=int(clock_doc["end_us"]) if "end_us" in clock_doc else None,
    )
    if clock.cycle_period_us <= 0:
        raise ValidationError("clock.cycle_period_us must be positive")

    script = []
    last_depart: dict[str, int] = {}
    for i, entry in enumerate(doc.get("script", [])):
        where = f"script[{i}]"
        ref = _require(entry, "tag", where)
        if ref not in seen_tags:
            raise ValidationError(f"{where}: unknown tag {ref}")
        arrive = int(_require(entry, "arrive_us", where))
        depart = int(_require(entry, "depart_us", where))
        if arrive >= depart:
            raise ValidationError(
                f"{where}: depart_us must be after arrive_us for tag {ref}")
        if arrive < clock.start_us:
            raise ValidationError(
                f"{where}: arrive_us before clock start for tag {ref}")
        if arrive < last_depart.get(ref, clock.start_us):
            raise ValidationError(
                f"{where}: waypoint for tag {ref} overlaps the previous one")
        last_depart[ref] = depart
        dp_id = entry.get("data_point")
        position = entry.get("position")
        if (dp_id is None) == (position is None):
            raise ValidationError(
                f"{where}: exactly one of data_point or position required")
        if dp_id is not None and dp_id not in seen_dp:
            raise ValidationError(f"{where}: unknown data point {dp_id}")
        script.append(Waypoint(ref, arrive, depart, dp_id,
                               _xy(position, where) if position else None))

    noise_doc = doc.get("noise", {})
    noise = NoiseModel(
        drop_probability=float(noise_doc.get("drop_probability", 0.0)),
        duplicate_probability=float(noise_doc.get("duplicate_probability", 0.0)),
        rssi_mean_dbm=int(noise_doc.get("rssi_mean_dbm", -60)),
        rssi_jitter_db=float(noise_doc.get("rssi_jitter_db", 0.0)),
        rng_seed=int(noise_doc.get("rng_seed", 0)),
    )
    return Scenario(data_points, tags, script, noise, clock)


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as handle:
        return load_scenario(handle.read())


# --- world stepping ---------------------------------------------------------


@dataclass
class World:
    """Pure function of (scenario, time): tag positions and raw reads."""
    scenario: Scenario
    _last_step_us: int | None = None
    _anchors: dict[str, list[tuple[int, tuple[float, float]]]] = field(
        default_factory=dict)

    def __post_init__(self):
        for tag in self.scenario.tags:
            anchors = [(self.scenario.clock.start_us, tag.initial_xy)]
            for wp in self.scenario.script:
                if wp.tag_ref != tag.ref:
                    continue
                pos = (wp.position if wp.position is not None
                       else self.scenario.data_point(wp.data_point_id).antenna_xy)
                anchors.append((wp.arrive_us, pos))
                anchors.append((wp.depart_us, pos))
            self._anchors[tag.ref] = anchors

    def position_at(self, tag_ref: str, now_us: int) -> tuple[float, float] | None:
        """Scripted position, or None once the tag has left the floor.

        Each segment owns the half-open interval [t0, t1): a dwell covers
        [arrive, depart) and the tag leaves the floor at its final depart.
        A tag with no waypoints stays parked at its initial position.
        """
        anchors = self._anchors[tag_ref]
        if len(anchors) == 1:
            return anchors[0][1]
        if now_us < anchors[0][0]:
            return anchors[0][1]
        if now_us >= anchors[-1][0]:
            return None
        for (t0, p0), (t1, p1) in zip(anchors, anchors[1:]):
            if t0 <= now_us < t1:
                frac = (now_us - t0) / (t1 - t0)
                return (p0[0] + (p1[0] - p0[0]) * frac,
                        p0[1] + (p1[1] - p0[1]) * frac)
        return None

    def step(self, now_us: int) -> list[ReadEvent]:
        """Raw reads for one cycle, ordered data point then tag."""
        clock = self.scenario.clock
        if (now_us - clock.start_us) % clock.cycle_period_us != 0:
            raise ValidationError(
                f"step time {now_us} not on the read cycle grid")
        if self._last_step_us is not None and now_us < self._last_step_us:
            raise ClockRegression(
                f"step at {now_us} after {self._last_step_us}")
        self._last_step_us = now_us
        positions = {tag.ref: self.position_at(tag.ref, now_us)
                     for tag in self.scenario.tags}
        reads = []
        for dp in self.scenario.data_points:
            for tag in self.scenario.tags:
                pos = positions[tag.ref]
                if pos is not None and in_read_zone(pos, dp):
                    reads.append(ReadEvent(
                        epc=tag.epc,
                        antenna_id=1,
                        first_seen_utc_us=now_us,
                        peak_rssi=self.scenario.noise.rssi_mean_dbm,
                        seen_count=1,
                        data_point_id=dp.data_point_id,
                    ))
        return reads

    def cycle_times(self) -> list[int]:
        clock = self.scenario.clock
        times = []
        t = clock.start_us
        end = self.scenario.end_us()
        while t <= end:
            times.append(t)
            t += clock.cycle_period_us
        return times

    def busy_cycle_times(self) -> list[int]:
        """Conservative superset of cycle times that can produce reads.

        Solves each travel segment against each read circle in closed
        form and widens the hit interval by one cycle on each side, so a
        runner may skip the rest of the grid without losing any read.
        """
        period = self.scenario.clock.cycle_period_us
        start = self.scenario.clock.start_us
        end = self.scenario.end_us()
        intervals: list[tuple[int, int]] = []
        for tag in self.scenario.tags:
            anchors = self._anchors[tag.ref]
            if len(anchors) == 1:
                segments = [((start, anchors[0][1]), (end, anchors[0][1]))]
            else:
                segments = list(zip(anchors, anchors[1:]))
            for (t0, p0), (t1, p1) in segments:
                for dp in self.scenario.data_points:
                    hit = _segment_circle_hit(p0, p1, dp.antenna_xy,
                                              dp.read_radius_m)
                    if hit is None:
                        continue
                    lo, hi = hit
                    intervals.append((t0 + int(lo * (t1 - t0)) - period,
                                      t0 + int(hi * (t1 - t0)) + period))
        ticks: set[int] = set()
        for lo_us, hi_us in intervals:
            steps_in = max(0, -((start - lo_us) // period))
            t = start + steps_in * period
            while t <= min(hi_us, end):
                ticks.add(t)
                t += period
        return sorted(ticks)


def _segment_circle_hit(p0, p1, center, radius):
    """Fraction interval [lo, hi] of segment p0->p1 within the circle."""
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    fx, fy = p0[0] - center[0], p0[1] - center[1]
    a = dx * dx + dy * dy
    if a == 0.0:
        return (0.0, 1.0) if math.hypot(fx, fy) <= radius else None
    b = 2.0 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - radius * radius
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    root = math.sqrt(disc)
    lo = (-b - root) / (2.0 * a)
    hi = (-b + root) / (2.0 * a)
    if hi < 0.0 or lo > 1.0:
        return None
    return max(lo, 0.0), min(hi, 1.0)


# --- noise ------------------------------------------------------------------


def _unit_uniform(seed: int, label: bytes, cycle_index: int, read_index: int) -> float:
    """Deterministic uniform in [0,1) keyed by (seed, cycle, read, label)."""
    digest = hashlib.sha256(
        struct.pack(">QqI", seed & 0xFFFFFFFFFFFFFFFF, cycle_index,
                    read_index) + label).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def apply_noise(reads: list[ReadEvent], noise: NoiseModel,
                cycle_index: int) -> list[ReadEvent]:
    """Drop, duplicate and jitter reads; exact replay under one seed.

    Randomness is counter-based: each (seed, cycle, read index) triple
    keys its own draws, so a re-run of any cycle is bit-identical.
    """
    out: list[ReadEvent] = []
    for index, read in enumerate(reads):
        if noise.drop_probability > 0.0 and _unit_uniform(
                noise.rng_seed, b"drop", cycle_index, index) < noise.drop_probability:
            continue
        rssi = read.peak_rssi
        if noise.rssi_jitter_db > 0.0:
            u = _unit_uniform(noise.rng_seed, b"jitter", cycle_index, index)
            rssi = int(round(read.peak_rssi + (2.0 * u - 1.0)
                             * noise.rssi_jitter_db))
            rssi = max(-128, min(127, rssi))
            read = replace(read, peak_rssi=rssi)
        out.append(read)
        if noise.duplicate_probability > 0.0 and _unit_uniform(
                noise.rng_seed, b"dup", cycle_index, index) < noise.duplicate_probability:
            out.append(replace(read, seen_count=read.seen_count + 1))
    return out
