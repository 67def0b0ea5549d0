"""Dispatch XML parsing and the deterministic finished-goods export."""

import random

import pytest

from sfc.engine import FinishedGoodsRecord
from sfc.erp_xml import (
    SchemaError,
    SemanticError,
    XmlSyntaxError,
    export_finished_goods_xml,
    parse_dispatch_xml,
    serialize_dispatch_xml,
)

MINIMAL = """<?xml version="1.0"?>
<DispatchList date="2013-03-06" plant="MOBICA-1">
  <Route id="R-1">
    <Step seq="1" workCenter="WC-CUT" plannedStart="100" plannedEnd="200"/>
    <Step seq="2" workCenter="WC-PACK" plannedStart="200" plannedEnd="300"/>
  </Route>
  <Order id="SO-1001" type="customer">
    <Product id="P-77" qty="4"/>
    <RouteRef id="R-1"/>
    <Ticket id="T-1"/>
    <Ticket id="T-2"/>
  </Order>
</DispatchList>
"""


class TestParse:
    def test_demo3_fixture(self, demo3_paths):
        dispatch = parse_dispatch_xml(demo3_paths["dispatch"].read_bytes())
        assert len(dispatch.orders) == 3
        assert len(dispatch.routes) == 2
        tickets = [t for o in dispatch.orders for t in o.ticket_codes]
        assert tickets == ["T-1", "T-2", "T-3"]
        assert dispatch.plant_id == "MOBICA-1"

    def test_minimal_document(self):
        dispatch = parse_dispatch_xml(MINIMAL)
        order = dispatch.orders[0]
        assert order.order.order_id == 1001
        assert order.product_id == 77
        assert order.quantity == 4
        assert dispatch.route("R-1").steps[1].work_center_id == "WC-PACK"

    def test_malformed_xml(self):
        with pytest.raises(XmlSyntaxError):
            parse_dispatch_xml(b"<DispatchList")

    def test_missing_route_for_order(self):
        document = MINIMAL.replace('<RouteRef id="R-1"/>',
                                   '<RouteRef id="R-9"/>')
        with pytest.raises(SemanticError, match="R-9"):
            parse_dispatch_xml(document)

    def test_order_without_routeref(self):
        document = MINIMAL.replace('<RouteRef id="R-1"/>', '')
        with pytest.raises(SemanticError, match="SO-1001"):
            parse_dispatch_xml(document)

    def test_inverted_planned_window_names_step_path(self):
        document = MINIMAL.replace(
            'plannedStart="100" plannedEnd="200"',
            'plannedStart="300" plannedEnd="200"')
        with pytest.raises(SemanticError, match=r"Route.*Step\[0\]"):
            parse_dispatch_xml(document)

    def test_missing_attribute_is_schema_error_with_path(self):
        document = MINIMAL.replace(' qty="4"', '')
        with pytest.raises(SchemaError, match="qty"):
            parse_dispatch_xml(document)

    def test_bad_attribute_type(self):
        document = MINIMAL.replace('qty="4"', 'qty="four"')
        with pytest.raises(SchemaError, match="four"):
            parse_dispatch_xml(document)

    def test_duplicate_ticket_across_orders(self):
        document = MINIMAL.replace('<Ticket id="T-2"/>', '<Ticket id="T-1"/>')
        with pytest.raises(SemanticError, match="T-1"):
            parse_dispatch_xml(document)

    def test_unexpected_element(self):
        document = MINIMAL.replace("</DispatchList>",
                                   "<Widget/></DispatchList>")
        with pytest.raises(SchemaError, match="Widget"):
            parse_dispatch_xml(document)

    def test_bad_order_type(self):
        document = MINIMAL.replace('type="customer"', 'type="rush"')
        with pytest.raises(SchemaError, match="rush"):
            parse_dispatch_xml(document)

    def test_parse_serialize_parse_is_identity(self, demo3_paths):
        first = parse_dispatch_xml(demo3_paths["dispatch"].read_bytes())
        echoed = serialize_dispatch_xml(first)
        assert parse_dispatch_xml(echoed) == first


class TestExport:
    RECORDS = [
        FinishedGoodsRecord("SO-1001", "P-77", 1, 500),
        FinishedGoodsRecord("SO-1002", "P-77", 2, 300),
        FinishedGoodsRecord("MO-3001", "P-88", 1, 300),
    ]

    def test_empty_export_matches_golden(self, demo3_paths):
        assert export_finished_goods_xml([], None) == \
            demo3_paths["golden_empty"].read_bytes()

    def test_shuffled_input_is_octet_identical(self):
        base = export_finished_goods_xml(self.RECORDS, "MOBICA-1")
        rng = random.Random(5)
        for _ in range(10):
            shuffled = self.RECORDS[:]
            rng.shuffle(shuffled)
            assert export_finished_goods_xml(shuffled, "MOBICA-1") == base

    def test_sorted_by_exit_time_then_serial(self):
        output = export_finished_goods_xml(self.RECORDS, "X-1").decode()
        first = output.index('serial="1" exitedAt="300"')
        second = output.index('serial="2" exitedAt="300"')
        third = output.index('exitedAt="500"')
        assert first < second < third

    def test_attribute_escaping(self):
        record = FinishedGoodsRecord('O-"1"', "P-1", 1, 1)
        output = export_finished_goods_xml([record], None)
        assert b'order=\'O-"1"\'' in output or b"&quot;" in output
