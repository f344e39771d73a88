"""Log-linear tracking error dynamics on SE(2) with invariant-set flow pipes."""

__version__ = "0.1.0"
