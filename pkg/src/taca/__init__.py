"""Task-and-architecture co-adaptation engine."""

__version__ = "0.1.0"
