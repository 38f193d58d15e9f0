"""Integrations with external dataset layouts."""

from .planetoid import convert_planetoid, read_linqs, read_planetoid

__all__ = ["convert_planetoid", "read_linqs", "read_planetoid"]
