"""Modes of convergence: statistics, verdicts and constructive certificates."""

from .statistics import *  # noqa: F401,F403
from .verdict import *  # noqa: F401,F403
from .constructions import *  # noqa: F401,F403
from . import constructions, statistics, verdict as verdicts  # noqa: F401
from .statistics import __all__ as _s
from .verdict import __all__ as _v
from .constructions import __all__ as _c

__all__ = [*_s, *_v, *_c]
