"""Deep-unfolded ADMM detectors for massive MIMO.

Matrices and vectors are float64 NumPy arrays in the real-valued model
(M = 2*mc rows, K = 2*kc columns).
"""

from ._admmdet import *  # noqa: F401,F403
from ._admmdet import __doc__  # noqa: F401

__version__ = "0.1.0"
