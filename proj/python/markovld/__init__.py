"""Python bindings for the markovld library."""

from ._core import *  # noqa: F401,F403
from ._core import MarkovldError, __doc__  # noqa: F401
