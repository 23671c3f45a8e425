"""Alias of :mod:`tunnelfwm.oracle`."""

import sys

from . import oracle as _impl

sys.modules[__name__] = _impl
