"""
Bell-Timing: simulation and verification of time-sequenced Bell-inequality experiments.
"""

__version__ = "0.1.0"
