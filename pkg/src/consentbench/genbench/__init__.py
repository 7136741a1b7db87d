"""Workload generation, benchmark execution and metrics."""
