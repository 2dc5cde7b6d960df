"""Random variables over domains: valuations, step random variables, the
random-variable monad, expectations, distributions and a small
probabilistic language."""

from .dyadic import Dyadic, DyInterval
from .errors import DomprobError

__all__ = ["Dyadic", "DyInterval", "DomprobError"]
__version__ = "0.1.0"
