"""Python bindings for the glyphforge recognition engine."""

from ._glyphforge import *  # noqa: F401,F403
from ._glyphforge import __doc__  # noqa: F401

DEFAULT_DIMS = GridDims(32, 32)  # noqa: F405
