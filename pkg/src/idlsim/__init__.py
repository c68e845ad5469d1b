"""Symbol detection for overloaded NOMA/MIMO systems.

Iterative discrete least squares (IDLS) detectors with auto-tuned
regularization, robust variants for CSI error and hardware impairments,
linear and l1 baselines, an exhaustive ML oracle, and a Monte-Carlo
BER harness.
"""

__version__ = "0.1.0"
