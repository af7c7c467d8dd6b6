"""Baseband OTFS simulation over delay-Doppler channels."""

__version__ = "0.1.0"
