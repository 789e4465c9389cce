"""qarsim: cavity-QED absorption refrigerator simulator.

Builds Lindblad generators for a trapped atom coupled to one or two optical
cavities, solves for steady states and time evolution, and cross-checks the
full, effective, and closed-form descriptions against each other.
"""

from . import analytics, hilbert, lindblad, models, solvers

__version__ = "0.1.0"

__all__ = ["analytics", "hilbert", "lindblad", "models", "solvers", "__version__"]
