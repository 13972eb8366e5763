"""Lattice-surgery simulation, temporally encoded measurements and resource estimates."""
__version__ = "0.1.0"
