"""Dispatch list: the daily plan of orders, routes and build tickets.

Entity codes are human-readable ("SO-1001", "T-1", "R-2"); the numeric
identity that travels on a tag is the code's trailing integer, so
"SO-1001" encodes as order id 1001. Work centers keep their string ids
only — they never ride on a tag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .tag_codec import OrderKind, OrderRef


class DispatchError(Exception):
    pass


class DuplicateTicket(DispatchError):
    pass


class UnknownRouteRef(DispatchError):
    pass


class BadRoute(DispatchError):
    pass


class BadOrder(DispatchError):
    pass


_TRAILING_INT = re.compile(r"(\d+)\s*$")


def numeric_id(code: str) -> int:
    """Trailing integer of an entity code: 'SO-1001' -> 1001."""
    match = _TRAILING_INT.search(code)
    if not match:
        raise DispatchError(f"code {code!r} has no trailing number")
    return int(match.group(1))


@dataclass(frozen=True)
class RouteStep:
    seq: int
    work_center_id: str
    planned_start_us: int
    planned_end_us: int

    def __post_init__(self):
        if self.planned_start_us >= self.planned_end_us:
            raise BadRoute(f"step {self.seq}: planned window inverted")


@dataclass(frozen=True)
class Route:
    route_code: str
    steps: tuple[RouteStep, ...]

    @property
    def route_id(self) -> int:
        return numeric_id(self.route_code)

    def __post_init__(self):
        if not self.steps:
            raise BadRoute(f"route {self.route_code}: no steps")
        for expected, step in enumerate(self.steps, start=1):
            if step.seq != expected:
                raise BadRoute(f"route {self.route_code}: seq must increase "
                               f"from 1, got {step.seq} at position {expected}")
        for prev, nxt in zip(self.steps, self.steps[1:]):
            if nxt.planned_start_us < prev.planned_end_us:
                raise BadRoute(f"route {self.route_code}: planned windows of "
                               f"steps {prev.seq} and {nxt.seq} overlap")

    def step_for_work_center(self, work_center_id: str) -> RouteStep | None:
        for step in self.steps:
            if step.work_center_id == work_center_id:
                return step
        return None


@dataclass(frozen=True)
class OrderPlan:
    order_code: str
    order_type: OrderKind
    product_code: str
    quantity: int
    route_code: str
    ticket_codes: tuple[str, ...]

    @property
    def order(self) -> OrderRef:
        return OrderRef(self.order_type, numeric_id(self.order_code))

    @property
    def product_id(self) -> int:
        return numeric_id(self.product_code)

    def __post_init__(self):
        if not self.ticket_codes:
            raise BadOrder(f"order {self.order_code}: no tickets")
        if self.quantity < len(self.ticket_codes):
            raise BadOrder(f"order {self.order_code}: quantity "
                           f"{self.quantity} below ticket count "
                           f"{len(self.ticket_codes)}")


@dataclass(frozen=True)
class DispatchList:
    dispatch_date: str
    plant_id: str
    routes: tuple[Route, ...] = field(default=())
    orders: tuple[OrderPlan, ...] = field(default=())

    def route(self, route_code: str) -> Route:
        for route in self.routes:
            if route.route_code == route_code:
                return route
        raise UnknownRouteRef(route_code)

    def validate(self) -> None:
        """Cross-entity invariants; field-level ones run at construction."""
        seen_codes: set[str] = set()
        seen_ids: set[int] = set()
        route_codes = {r.route_code for r in self.routes}
        if len(route_codes) != len(self.routes):
            raise BadRoute("duplicate route codes")
        for order in self.orders:
            if order.route_code not in route_codes:
                raise UnknownRouteRef(
                    f"order {order.order_code} references unknown route "
                    f"{order.route_code}")
            for code in order.ticket_codes:
                tid = numeric_id(code)
                if code in seen_codes or tid in seen_ids:
                    raise DuplicateTicket(
                        f"ticket {code} appears more than once")
                seen_codes.add(code)
                seen_ids.add(tid)
