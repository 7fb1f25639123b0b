"""Braid equivalence and forcing for homoclinic orbits of the Smale horseshoe."""

__version__ = "0.1.0"
