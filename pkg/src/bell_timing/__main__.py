"""
Entry point for running bell-timing as a module: python -m bell_timing
"""

from bell_timing.cli import app

if __name__ in {"__main__", "__mp_main__"}:
    app()
