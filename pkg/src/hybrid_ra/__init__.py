"""Monte-Carlo simulation of TA-aided hybrid random access for mMTC and URLLC devices."""
from .exceptions import HybridRAError, InvalidConfigError, InvalidInputError
from .geometry import GeometryConfig

__version__ = "0.1.0"

__all__ = ["GeometryConfig", "HybridRAError", "InvalidConfigError", "InvalidInputError", "__version__"]
