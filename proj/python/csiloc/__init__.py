"""CSI-fingerprint indoor positioning.

Thin Python wrapper over the C++ core: multipath simulation, space-frequency
subspace feature estimation, fingerprint databases, and weighted-random-forest
localization with WKNN / plain-RF baselines.
"""

try:
    from ._csiloc import *  # noqa: F401,F403  (installed package layout)
    from ._csiloc import __version__  # noqa: F401
except ImportError:  # development layout: module on PYTHONPATH
    from _csiloc import *  # noqa: F401,F403
    from _csiloc import __version__  # noqa: F401
