"""Onion quantum reservoir computing for corrosion forecasting.

Multi-layer quantum reservoirs whose channel spectra are tuned by rotation
prefactors and mid-circuit measurements, classical (onion) echo state
networks, ridge readouts and an evaluation harness on pitting series.
"""

__version__ = "0.1.0"
