"""Test package namespace for stable pytest imports."""