"""Building age estimation from facade patches."""

from ._core import *  # noqa: F401,F403
from ._core import BageError, NUM_EPOCHS, FEATURE_DIM  # noqa: F401

EPOCH_NAMES = [epoch_name(i) for i in range(NUM_EPOCHS)]  # noqa: F405
