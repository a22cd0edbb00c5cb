"""Virtual overlay fabric toolchain: compile, harden, inject, scrub, repair."""

from ._relic import *  # noqa: F401,F403
from ._relic import __version__  # noqa: F401
