"""Consent-compliance checking over privacy-policy logs, with a benchmark harness."""

__version__ = "0.1.0"
