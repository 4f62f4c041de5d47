"""Physical-layer simulator of an amplifying and filtering reconfigurable
intelligent surface (AF-RIS): RF chain models, 2-bit beam steering, link
budget with transmit noise floor, QPSK Monte Carlo and filter metrics."""

__version__ = "0.1.0"
