"""Commands module."""
