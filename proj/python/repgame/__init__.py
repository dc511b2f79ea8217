"""Suspicion-level blocking game: equilibrium, simulation, calibration."""

try:
    from ._repgame import *  # noqa: F401,F403
    from ._repgame import __version__  # noqa: F401
except ImportError:
    # development layout: the extension sits on sys.path instead of in the package
    from _repgame import *  # noqa: F401,F403
    from _repgame import __version__  # noqa: F401
