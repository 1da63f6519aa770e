"""Settings, logging configuration and built-in experiment files."""
