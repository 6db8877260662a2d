"""L-convex stochastic geometry in the plane."""

from .body import Frame, SmoothBody, validate_pair, volume_product_projection
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
