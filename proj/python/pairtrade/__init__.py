"""Pairs-trading research toolkit: screening, cointegration, signals, backtests
and threshold optimization, backed by a C++ core."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConfigError,
    DataError,
    Error,
    NumericalError,
    PitViolation,
    PricePanel,
    SpreadModel,
)

__version__ = "0.1.0"
