"""Partitioned BCH defect-masking codes and an SLC flash interference channel."""

__version__ = "0.1.0"
