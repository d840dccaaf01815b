"""Secure multi-party logistic regression over additively shared data."""
from .ring import FixedPointCodec, RingTensor
from .outputs import FitOutput

__version__ = "0.1.0"

__all__ = ["FixedPointCodec", "RingTensor", "FitOutput", "__version__"]
