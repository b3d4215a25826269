"""Python bindings for the terraid simulator and analysis pipeline.

The heavy lifting lives in the compiled extension; this package re-exports
its surface: heightfield generation and queries, robot settling, the
episode reward primitives, rolling-window features, the two-component
Gaussian mixture, and a gym-style target-reaching environment.
"""

try:
    from ._terraid import *  # noqa: F401,F403
    from ._terraid import __version__  # noqa: F401
except ImportError:  # in-tree builds place the extension beside the package
    from _terraid import *  # noqa: F401,F403
    from _terraid import __version__  # noqa: F401
