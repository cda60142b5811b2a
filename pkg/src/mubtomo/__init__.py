"""Fisher-information error analysis for tomography with mutually unbiased bases."""

__version__ = "0.1.0"
