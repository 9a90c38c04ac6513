"""Symmetry operators, monodromy and Laurent solutions of the sDCHE, with the Josephson bridge."""

__version__ = "0.1.0"
