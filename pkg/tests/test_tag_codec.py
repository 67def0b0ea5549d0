"""Tag codec: layout vectors, CRC oracle, round-trips, tamper detection."""

import random

import pytest

from sfc import tag_codec
from sfc.tag_codec import (
    BadKind,
    BadLength,
    BadMagic,
    BadVersion,
    BuildTicketData,
    CrcMismatch,
    OrderKind,
    OrderRef,
    ProductTagData,
    crc16,
    decode_tag,
    encode_build_ticket,
    encode_product_tag,
)


def crc16_bitwise(data: bytes) -> int:
    """Independent bit-by-bit CRC-16/CCITT-FALSE reference."""
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


CUSTOMER = OrderKind.CUSTOMER_SALES_ORDER
MTS = OrderKind.INTERNAL_MAKE_TO_STOCK


class TestCrc16:
    def test_empty_is_init_value(self):
        assert crc16(b"") == 0xFFFF

    def test_check_string(self):
        assert crc16(b"123456789") == 0x29B1
        assert crc16_bitwise(b"123456789") == 0x29B1

    def test_matches_bitwise_oracle(self):
        rng = random.Random(7)
        for _ in range(200):
            data = rng.randbytes(rng.randrange(0, 80))
            assert crc16(data) == crc16_bitwise(data)

    def test_single_bit_flips_change_crc(self):
        rng = random.Random(11)
        sample = rng.randbytes(31)
        base = crc16(sample)
        for bit in range(31 * 8):
            flipped = bytearray(sample)
            flipped[bit // 8] ^= 1 << (bit % 8)
            assert crc16(bytes(flipped)) != base


class TestBuildTicketLayout:
    def test_zero_ticket_image(self):
        ticket = BuildTicketData(OrderRef(CUSTOMER, 0), 0, 0, 0)
        image = encode_build_ticket(ticket)
        assert len(image) == 64
        expected_body = bytes([0x5F, 0x11, 0x00]) + bytes(28)
        crc = crc16_bitwise(expected_body)
        assert image[:31] == expected_body
        assert image[31:33] == bytes([crc >> 8, crc & 0xFF])
        assert image[33:] == bytes(31)

    def test_hand_packed_fields(self):
        ticket = BuildTicketData(
            OrderRef(MTS, 0x0102030405060708), 0x4D, 0x01, 0x2A)
        image = encode_build_ticket(ticket)
        assert image[0] == 0x5F
        assert image[1] == 0x11
        assert image[2] == 0x01
        assert image[3:11] == bytes([1, 2, 3, 4, 5, 6, 7, 8])
        assert image[11:19] == bytes(7) + bytes([0x4D])
        assert image[19:23] == bytes(3) + bytes([0x01])
        assert image[23:31] == bytes(7) + bytes([0x2A])
        assert image[31:33] == crc16_bitwise(image[:31]).to_bytes(2, "big")
        assert image[33:] == bytes(31)

    def test_encoding_deterministic(self):
        ticket = BuildTicketData(OrderRef(CUSTOMER, 9), 8, 7, 6)
        assert encode_build_ticket(ticket) == encode_build_ticket(ticket)


class TestProductTagLayout:
    def test_zero_product_image(self):
        product = ProductTagData(OrderRef(CUSTOMER, 0), 0, 0)
        image = encode_product_tag(product)
        assert image[:3] == bytes([0x5F, 0x12, 0x00])
        assert image[19:23] == bytes(4)  # route slot zero
        assert image[31:33] == crc16_bitwise(image[:31]).to_bytes(2, "big")

    def test_hand_packed_fields(self):
        product = ProductTagData(OrderRef(CUSTOMER, 1001), 77, 5)
        image = encode_product_tag(product)
        assert image[3:11] == (1001).to_bytes(8, "big")
        assert image[18] == 0x4D
        assert image[19:23] == bytes(4)
        assert image[23:31] == (5).to_bytes(8, "big")


def _random_ticket(rng: random.Random) -> BuildTicketData:
    kind = rng.choice([CUSTOMER, MTS])
    return BuildTicketData(
        OrderRef(kind, rng.randrange(0, 2**64)),
        rng.randrange(0, 2**64),
        rng.randrange(0, 2**32),
        rng.randrange(0, 2**64),
    )


def _random_product(rng: random.Random) -> ProductTagData:
    kind = rng.choice([CUSTOMER, MTS])
    return ProductTagData(
        OrderRef(kind, rng.randrange(0, 2**64)),
        rng.randrange(0, 2**64),
        rng.randrange(0, 2**64),
    )


class TestRoundTrip:
    def test_build_tickets_1000(self):
        rng = random.Random(42)
        for _ in range(1000):
            ticket = _random_ticket(rng)
            assert decode_tag(encode_build_ticket(ticket)) == ticket

    def test_products_1000(self):
        rng = random.Random(43)
        for _ in range(1000):
            product = _random_product(rng)
            assert decode_tag(encode_product_tag(product)) == product

    def test_every_image_is_512_bits(self):
        rng = random.Random(44)
        for _ in range(50):
            assert len(encode_build_ticket(_random_ticket(rng))) * 8 == 512
            assert len(encode_product_tag(_random_product(rng))) * 8 == 512


class TestDecodeErrors:
    def test_zero_image_is_bad_magic(self):
        with pytest.raises(BadMagic):
            decode_tag(bytes(64))

    def test_short_input_is_bad_length(self):
        with pytest.raises(BadLength):
            decode_tag(bytes(63))
        with pytest.raises(BadLength):
            decode_tag(bytes(65))

    def test_bad_version_nibble(self):
        image = bytearray(encode_build_ticket(
            BuildTicketData(OrderRef(CUSTOMER, 1), 2, 3, 4)))
        image[1] = 0x21  # version 2
        with pytest.raises(BadVersion):
            decode_tag(bytes(image))

    def test_bad_kind_nibble(self):
        image = bytearray(encode_build_ticket(
            BuildTicketData(OrderRef(CUSTOMER, 1), 2, 3, 4)))
        image[1] = 0x13  # kind 3
        with pytest.raises(BadKind):
            decode_tag(bytes(image))

    def test_crc_mismatch_on_payload_corruption(self):
        image = bytearray(encode_build_ticket(
            BuildTicketData(OrderRef(CUSTOMER, 1), 2, 3, 4)))
        image[10] ^= 0x01
        with pytest.raises(CrcMismatch):
            decode_tag(bytes(image))

    def test_all_248_single_bit_flips_rejected(self):
        base = encode_build_ticket(
            BuildTicketData(OrderRef(MTS, 0xDEADBEEF), 77, 2, 12345))
        for bit in range(31 * 8):
            corrupted = bytearray(base)
            corrupted[bit // 8] ^= 1 << (7 - bit % 8)
            with pytest.raises((BadMagic, BadVersion, BadKind, CrcMismatch)):
                decode_tag(bytes(corrupted))

    def test_crc_field_corruption_rejected(self):
        base = encode_build_ticket(
            BuildTicketData(OrderRef(CUSTOMER, 5), 6, 7, 8))
        for offset in (31, 32):
            corrupted = bytearray(base)
            corrupted[offset] ^= 0x80
            with pytest.raises(CrcMismatch):
                decode_tag(bytes(corrupted))

    def test_out_of_range_field_rejected_at_encode(self):
        with pytest.raises(ValueError):
            encode_build_ticket(
                BuildTicketData(OrderRef(CUSTOMER, 2**64), 0, 0, 0))
        with pytest.raises(ValueError):
            encode_build_ticket(
                BuildTicketData(OrderRef(CUSTOMER, 0), 0, 2**32, 0))


def test_module_exports_size_constant():
    assert tag_codec.TAG_IMAGE_SIZE == 64
