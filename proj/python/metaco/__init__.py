"""Unsupervised GNN solvers for max clique, vertex cover and independent set."""

from ._metaco import *  # noqa: F401,F403
from ._metaco import FormatError, VersionError, __doc__  # noqa: F401

__version__ = "0.1.0"
