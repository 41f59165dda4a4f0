"""Design compiler and simulator for polyphenylene donor-bridge-acceptor diodes and diode-logic gates."""

__version__ = "0.1.0"
