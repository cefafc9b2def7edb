"""Gabor-frame discretization of (magnetic) Weyl operators."""

from ._beals import *  # noqa: F401,F403
from ._beals import __doc__  # noqa: F401
