"""Disordered cross-stitch flatband lattice: exact ensembles and effective theory."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
