"""Reachability and inverse constraint learning on Dubins grids."""

from ._reachkit import *  # noqa: F401,F403
from ._reachkit import __version__  # noqa: F401
