"""Cooperative molecular-communication error toolkit.

Thin package wrapper over the compiled extension; the modelling, simulation
and optimization all live in the C++ core.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
