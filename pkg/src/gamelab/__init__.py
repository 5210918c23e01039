"""gamelab - numerical laboratory for singular-controller vs stopper games."""

__version__ = "0.3.0"
