"""Convolution kernel selection.

The compiled kernel is preferred when it was built; the pure-Python twin
is the fallback.  Setting ``TAILKIT_PURE=1`` in the environment forces the
fallback (the benchmark uses this to time both).  Both kernels are exact
and produce bit-identical results, so the choice never affects output.
"""

from __future__ import annotations

import os

from tailkit import _conv_py

if os.environ.get("TAILKIT_PURE"):
    _impl = _conv_py
else:
    try:
        from tailkit import _conv_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _conv_py

BACKEND: str = _impl.BACKEND
conv_point = _impl.conv_point
conv_dense = _impl.conv_dense


def backends() -> dict:
    """All importable kernel implementations keyed by name."""
    found = {_conv_py.BACKEND: _conv_py}
    try:
        from tailkit import _conv_cy
        found[_conv_cy.BACKEND] = _conv_cy
    except ImportError:
        pass
    return found
