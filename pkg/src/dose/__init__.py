"""Digital organism simulation: codon VM, GA hierarchy, 3-D world, driver and analysis."""

__version__ = "0.1.0"
