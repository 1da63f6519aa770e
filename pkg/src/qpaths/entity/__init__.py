"""Immutable domain types for densities, paths, sampling and results.

This namespace stays descriptive rather than acting as a barrel file.
Import concrete types from their dedicated modules.
"""
