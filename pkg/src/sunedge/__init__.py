"""Sunlight-aware scheduling for space edge computing networks."""

__version__ = "0.1.0"
