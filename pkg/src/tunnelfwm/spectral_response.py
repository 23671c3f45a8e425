"""Alias of :mod:`tunnelfwm.spectral`."""

import sys

from . import spectral as _impl

sys.modules[__name__] = _impl
