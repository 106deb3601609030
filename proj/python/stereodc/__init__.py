"""Disparity-compensated stereo image codec."""

try:
    from ._stereodc import *  # noqa: F401,F403  (installed package)
    from ._stereodc import __version__  # noqa: F401
except ImportError:
    from _stereodc import *  # noqa: F401,F403  (in-tree build)
    from _stereodc import __version__  # noqa: F401
