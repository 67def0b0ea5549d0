"""Desk-scale RFID shop-floor control: tag codec, LLRP subset, simulated
readers, WIP tracking engine and an XML/HTTP ERP gateway."""

__version__ = "0.1.0"
