"""Alias of :mod:`tunnelfwm.transform`."""

import sys

from . import transform as _impl

sys.modules[__name__] = _impl
