"""Boltzmann planar maps through labeled mobiles, with exact verification oracles."""

__version__ = "0.1.0-dev"
