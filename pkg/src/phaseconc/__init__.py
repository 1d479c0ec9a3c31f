"""Phase concentration of weak coherent states by noise addition and photon subtraction."""

__version__ = "0.1.0"
