"""Exact diagnostics for modes of convergence of simple-function sequences.

Subpackages and modules:

* ``measure_space``: rational partitions, measurable subsets, simple functions.
* ``sequences``: lazily evaluated sequence families and the example gallery.
* ``modes``: statistics, three-valued verdicts and constructive results.
* ``preservation``: composition with scalar maps.
* ``relaxation``: relative entropy and the Euler-with-friction experiment.
* ``cli``: the ``modeconv`` command.
"""

from .measure_space import Domain, MeasurableSubset, Partition, SimpleFunction, integrate_p, superlevel_set
from .modes import DecayCriterion, Mode, Verdict, verdict
from .sequences import SequenceFamily, gallery

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "MeasurableSubset",
    "Partition",
    "SimpleFunction",
    "integrate_p",
    "superlevel_set",
    "DecayCriterion",
    "Mode",
    "Verdict",
    "verdict",
    "SequenceFamily",
    "gallery",
]
