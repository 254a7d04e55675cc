"""Heights of toric Fano varieties from their moment polytopes."""

__version__ = "0.1.0"
