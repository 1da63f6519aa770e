"""Validated experiment configuration and result row models."""
