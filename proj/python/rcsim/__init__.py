"""Synthetic scene-graph relationship world with loss-driven batch recomposition.

Thin python surface over the C++ core: world generation, query-set sampling
kernels, softmax training and the recall metrics.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401
