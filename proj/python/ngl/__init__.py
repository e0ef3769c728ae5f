"""Optimization with inexact gradients: problems, noisy oracles, solvers and bounds."""

from ._core import *  # noqa: F401,F403
from ._core import Error, HypothesisViolation, InvalidInput, __doc__  # noqa: F401
