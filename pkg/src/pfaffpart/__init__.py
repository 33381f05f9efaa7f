"""Executable Pfaffian partitioning: chains, bounds, certified counting, partitions."""

__version__ = "0.1.0"
