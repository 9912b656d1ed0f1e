"""Shared-DAG runtime monitor for past-time metric temporal logic."""

__version__ = "0.1.0"
FORMAT_VERSION = 1
