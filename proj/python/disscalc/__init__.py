"""Functional calculus and perturbation experiments for dissipative matrices."""

from ._core import *  # noqa: F401,F403
from ._core import DisscalcError, __version__, prng_version
