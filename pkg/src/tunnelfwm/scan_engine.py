"""Alias of :mod:`tunnelfwm.scan`."""

import sys

from . import scan as _impl

sys.modules[__name__] = _impl
