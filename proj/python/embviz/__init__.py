"""Metric-embedding generalization toolkit.

Thin package wrapper over the _embviz extension module.
"""

from ._embviz import *  # noqa: F401,F403
from ._embviz import __doc__  # noqa: F401
