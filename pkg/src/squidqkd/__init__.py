"""Simulation and analytic toolkit for on-demand CV-QKD with dc-SQUID coherent states.

Subpackages
-----------
fock      truncated Fock-space states, unitaries, homodyne sampling
analytic  closed forms for Kerr storage variances, cat states and noise
device    junction parameters, effective rates, three-pulse preparation
protocol  Monte-Carlo rounds, channel, measurement schemes, sifting
keyrate   noise estimation, secure rates, reconciliation, privacy amplification
figures   plot-ready tables and transmittance sweeps
"""

__version__ = "0.1.0"

from ._accel import backend_name
from .errors import SquidQKDError

__all__ = ["__version__", "backend_name", "SquidQKDError"]
