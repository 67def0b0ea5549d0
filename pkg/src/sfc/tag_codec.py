"""Build-ticket and product tag payload codec for 512-bit RFID tags.

Low-cost UHF tags give 512 bits (64 octets) of usable memory, so the
payload is a fixed-offset big-endian layout with an integrity check:

    offset   field
    [0]      magic 0x5F
    [1]      high nibble: layout version (1); low nibble: payload kind
             (1 = build ticket, 2 = product)
    [2]      order kind (0x00 customer sales order, 0x01 make-to-stock)
    [3:11]   order id, u64
    [11:19]  product id, u64
    [19:23]  route id, u32 (always zero on product tags)
    [23:31]  ticket id, u64 (product serial on product tags)
    [31:33]  CRC-16/CCITT-FALSE over octets 0..30
    [33:64]  reserved, zero

Detailed routing never travels on the tag; it is resolved from the
dispatch list held by the engine.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

TAG_IMAGE_SIZE = 64

_MAGIC = 0x5F
_VERSION = 1
_KIND_BUILD_TICKET = 1
_KIND_PRODUCT = 2

_BODY = struct.Struct(">BBBQQIQ")  # octets 0..30, the CRC-covered region
_CRC = struct.Struct(">H")

_CRC_POLY = 0x1021
_CRC_INIT = 0xFFFF


class TagCodecError(Exception):
    """Base for tag image decode failures."""


class BadLength(TagCodecError):
    pass


class BadMagic(TagCodecError):
    pass


class BadVersion(TagCodecError):
    pass


class BadKind(TagCodecError):
    pass


class CrcMismatch(TagCodecError):
    pass


class OrderKind(enum.Enum):
    CUSTOMER_SALES_ORDER = "customer"
    INTERNAL_MAKE_TO_STOCK = "make-to-stock"


_ORDER_KIND_OCTET = {
    OrderKind.CUSTOMER_SALES_ORDER: 0x00,
    OrderKind.INTERNAL_MAKE_TO_STOCK: 0x01,
}
_OCTET_ORDER_KIND = {v: k for k, v in _ORDER_KIND_OCTET.items()}


@dataclass(frozen=True)
class OrderRef:
    kind: OrderKind
    order_id: int


@dataclass(frozen=True)
class BuildTicketData:
    order: OrderRef
    product_id: int
    route_id: int
    ticket_id: int


@dataclass(frozen=True)
class ProductTagData:
    order: OrderRef
    product_id: int
    serial: int


def _crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ _CRC_POLY) if crc & 0x8000 else (crc << 1)
        table.append(crc & 0xFFFF)
    return tuple(table)


_TABLE = _crc_table()


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection or xor-out."""
    crc = _CRC_INIT
    for byte in data:
        crc = ((crc << 8) ^ _TABLE[(crc >> 8) ^ byte]) & 0xFFFF
    return crc


def _check_range(name: str, value: int, bits: int) -> int:
    if not 0 <= value < (1 << bits):
        raise ValueError(f"{name} out of range for u{bits}: {value!r}")
    return value


def _pack(kind_nibble: int, order: OrderRef, product_id: int,
          route_id: int, tail_id: int) -> bytes:
    body = _BODY.pack(
        _MAGIC,
        (_VERSION << 4) | kind_nibble,
        _ORDER_KIND_OCTET[order.kind],
        _check_range("order_id", order.order_id, 64),
        _check_range("product_id", product_id, 64),
        _check_range("route_id", route_id, 32),
        _check_range("ticket_id/serial", tail_id, 64),
    )
    image = body + _CRC.pack(crc16(body))
    return image + bytes(TAG_IMAGE_SIZE - len(image))


def encode_build_ticket(ticket: BuildTicketData) -> bytes:
    """Encode a build ticket into a 64-octet tag memory image."""
    return _pack(_KIND_BUILD_TICKET, ticket.order, ticket.product_id,
                 ticket.route_id, ticket.ticket_id)


def encode_product_tag(product: ProductTagData) -> bytes:
    """Encode a product tag; the serial rides in the ticket-id slot."""
    return _pack(_KIND_PRODUCT, product.order, product.product_id,
                 0, product.serial)


def decode_tag(image: bytes) -> BuildTicketData | ProductTagData:
    """Decode a 64-octet image, validating magic, version, kind and CRC.

    Checks run in that order and the first failure raises; a valid image
    yields BuildTicketData or ProductTagData depending on the kind nibble.
    """
    if len(image) != TAG_IMAGE_SIZE:
        raise BadLength(f"expected {TAG_IMAGE_SIZE} octets, got {len(image)}")
    magic, ver_kind, order_octet, order_id, product_id, route_id, tail_id = \
        _BODY.unpack(image[:_BODY.size])
    if magic != _MAGIC:
        raise BadMagic(f"octet 0 is 0x{magic:02X}, expected 0x{_MAGIC:02X}")
    version = ver_kind >> 4
    if version != _VERSION:
        raise BadVersion(f"version nibble is {version}, expected {_VERSION}")
    kind = ver_kind & 0x0F
    if kind not in (_KIND_BUILD_TICKET, _KIND_PRODUCT):
        raise BadKind(f"kind nibble is {kind}")
    (stored_crc,) = _CRC.unpack_from(image, _BODY.size)
    computed = crc16(image[:_BODY.size])
    if stored_crc != computed:
        raise CrcMismatch(f"stored 0x{stored_crc:04X}, computed 0x{computed:04X}")
    order_kind = _OCTET_ORDER_KIND.get(order_octet)
    if order_kind is None:
        # Covered by the CRC, so only reachable on images we never emit.
        raise BadKind(f"order kind octet is 0x{order_octet:02X}")
    order = OrderRef(order_kind, order_id)
    if kind == _KIND_BUILD_TICKET:
        return BuildTicketData(order, product_id, route_id, tail_id)
    return ProductTagData(order, product_id, tail_id)
