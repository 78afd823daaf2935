"""Joint outcome distributions of localized measurements under standard and causal quantum theory."""
__version__ = "0.1.0"
