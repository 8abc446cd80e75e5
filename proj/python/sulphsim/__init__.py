"""Marble sulphation with surface rugosity: bulk SO2/calcite solver and
boundary rugosity evolution."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
