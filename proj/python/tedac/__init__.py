"""Python bindings for the tedac C++ core."""

from ._tedac import *  # noqa: F401,F403
from ._tedac import __version__, TedacError  # noqa: F401
