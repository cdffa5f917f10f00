"""Electric-vehicle flexibility in capacity-expansion and dispatch models."""

__version__ = "0.1.0"
