"""ERP exchange formats: dispatch-list XML in, finished-goods XML out.

Dispatch document shape:

    <DispatchList date="2013-03-06" plant="MOBICA-1">
      <Route id="R-1">
        <Step seq="1" workCenter="WC-CUT" plannedStart="..." plannedEnd="..."/>
      </Route>
      <Order id="SO-1001" type="customer">
        <Product id="P-77" qty="4"/>
        <RouteRef id="R-1"/>
        <Ticket id="T-1"/>
      </Order>
    </DispatchList>

Times are integer microseconds since the Unix epoch, UTC. Order type is
"customer" or "make-to-stock". Entity ids must end in a number — that
trailing integer is the identity written onto tags.

The finished-goods export is deterministic: items sorted by exit time
then serial, fixed attribute order, one element per line.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.sax.saxutils import quoteattr

from .dispatch import (
    BadOrder,
    BadRoute,
    DispatchError,
    DispatchList,
    DuplicateTicket,
    OrderPlan,
    Route,
    RouteStep,
    UnknownRouteRef,
    numeric_id,
)
from .engine import FinishedGoodsRecord
from .tag_codec import OrderKind


class XmlSyntaxError(Exception):
    pass


class SchemaError(Exception):
    pass


class SemanticError(Exception):
    pass


_ORDER_TYPES = {kind.value: kind for kind in OrderKind}


def _attr(elem: ET.Element, name: str, path: str) -> str:
    value = elem.get(name)
    if value is None:
        raise SchemaError(f"{path}: missing attribute {name!r}")
    return value


def _int_attr(elem: ET.Element, name: str, path: str) -> int:
    raw = _attr(elem, name, path)
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(f"{path}: attribute {name}={raw!r} is not an "
                          f"integer") from None


def parse_dispatch_xml(document: bytes | str) -> DispatchList:
    """Parse and validate a dispatch-list document.

    Raises XmlSyntaxError for malformed XML, SchemaError for missing or
    mistyped elements/attributes (with the element path), SemanticError
    for cross-references and inverted plans.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise XmlSyntaxError(str(exc)) from exc
    if root.tag != "DispatchList":
        raise SchemaError(f"/: root element is {root.tag!r}, "
                          f"expected DispatchList")
    date = _attr(root, "date", "/DispatchList")
    plant = _attr(root, "plant", "/DispatchList")

    routes: list[Route] = []
    orders: list[OrderPlan] = []
    for index, child in enumerate(root):
        path = f"/DispatchList/{child.tag}[{index}]"
        if child.tag == "Route":
            routes.append(_parse_route(child, path))
        elif child.tag == "Order":
            orders.append(_parse_order(child, path))
        else:
            raise SchemaError(f"{path}: unexpected element")

    dispatch = DispatchList(date, plant, tuple(routes), tuple(orders))
    try:
        dispatch.validate()
    except (DuplicateTicket, UnknownRouteRef) as exc:
        raise SemanticError(str(exc)) from exc
    return dispatch


def _parse_route(elem: ET.Element, path: str) -> Route:
    code = _attr(elem, "id", path)
    steps = []
    for index, child in enumerate(elem):
        step_path = f"{path}/Step[{index}]"
        if child.tag != "Step":
            raise SchemaError(f"{step_path}: unexpected element {child.tag}")
        start = _int_attr(child, "plannedStart", step_path)
        end = _int_attr(child, "plannedEnd", step_path)
        if start >= end:
            raise SemanticError(
                f"{step_path}: plannedEnd precedes plannedStart")
        try:
            steps.append(RouteStep(_int_attr(child, "seq", step_path),
                                   _attr(child, "workCenter", step_path),
                                   start, end))
        except BadRoute as exc:
            raise SemanticError(f"{step_path}: {exc}") from exc
    try:
        route = Route(code, tuple(steps))
        numeric_id(code)
    except (BadRoute, DispatchError) as exc:
        raise SemanticError(f"{path}: {exc}") from exc
    return route


def _parse_order(elem: ET.Element, path: str) -> OrderPlan:
    code = _attr(elem, "id", path)
    type_raw = _attr(elem, "type", path)
    order_type = _ORDER_TYPES.get(type_raw)
    if order_type is None:
        raise SchemaError(f"{path}: type={type_raw!r} must be one of "
                          f"{sorted(_ORDER_TYPES)}")
    product = route_ref = None
    quantity = 0
    tickets: list[str] = []
    for index, child in enumerate(elem):
        child_path = f"{path}/{child.tag}[{index}]"
        if child.tag == "Product":
            if product is not None:
                raise SchemaError(f"{child_path}: duplicate Product")
            product = _attr(child, "id", child_path)
            quantity = _int_attr(child, "qty", child_path)
        elif child.tag == "RouteRef":
            if route_ref is not None:
                raise SchemaError(f"{child_path}: duplicate RouteRef")
            route_ref = _attr(child, "id", child_path)
        elif child.tag == "Ticket":
            tickets.append(_attr(child, "id", child_path))
        else:
            raise SchemaError(f"{child_path}: unexpected element")
    if product is None:
        raise SchemaError(f"{path}: missing Product element")
    if route_ref is None:
        raise SemanticError(f"{path}: order {code} has no RouteRef")
    if not tickets:
        raise SchemaError(f"{path}: order {code} has no Ticket elements")
    try:
        plan = OrderPlan(code, order_type, product, quantity, route_ref,
                         tuple(tickets))
        numeric_id(code)
        numeric_id(product)
        for ticket in tickets:
            numeric_id(ticket)
    except (BadOrder, DispatchError) as exc:
        raise SemanticError(f"{path}: {exc}") from exc
    return plan


def serialize_dispatch_xml(dispatch: DispatchList) -> bytes:
    """Canonical re-serialization, used by the dispatch echo endpoint."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<DispatchList date={quoteattr(dispatch.dispatch_date)} '
             f'plant={quoteattr(dispatch.plant_id)}>']
    for route in dispatch.routes:
        lines.append(f'  <Route id={quoteattr(route.route_code)}>')
        for step in route.steps:
            lines.append(
                f'    <Step seq="{step.seq}" '
                f'workCenter={quoteattr(step.work_center_id)} '
                f'plannedStart="{step.planned_start_us}" '
                f'plannedEnd="{step.planned_end_us}"/>')
        lines.append('  </Route>')
    for order in dispatch.orders:
        lines.append(f'  <Order id={quoteattr(order.order_code)} '
                     f'type={quoteattr(order.order_type.value)}>')
        lines.append(f'    <Product id={quoteattr(order.product_code)} '
                     f'qty="{order.quantity}"/>')
        lines.append(f'    <RouteRef id={quoteattr(order.route_code)}/>')
        for ticket in order.ticket_codes:
            lines.append(f'    <Ticket id={quoteattr(ticket)}/>')
        lines.append('  </Order>')
    lines.append('</DispatchList>')
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_finished_goods_xml(records: list[FinishedGoodsRecord],
                              plant_id: str | None = None) -> bytes:
    """Deterministic export: identical inputs give octet-identical output."""
    ordered = sorted(records, key=lambda r: (r.exited_at_us, r.serial,
                                             r.order_code))
    plant_attr = f' plant={quoteattr(plant_id)}' if plant_id else ''
    if not ordered:
        return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<FinishedGoods{plant_attr}/>\n').encode("utf-8")
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<FinishedGoods{plant_attr}>']
    for record in ordered:
        lines.append(f'  <Item order={quoteattr(record.order_code)} '
                     f'product={quoteattr(record.product_code)} '
                     f'serial="{record.serial}" '
                     f'exitedAt="{record.exited_at_us}"/>')
    lines.append('</FinishedGoods>')
    return ("\n".join(lines) + "\n").encode("utf-8")
