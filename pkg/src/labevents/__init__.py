"""Lab-relative events, relative measurability and localisation checks for quantum-switch models."""

__version__ = "0.1.0"
