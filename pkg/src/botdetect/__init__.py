"""Social-bot detection: light metadata features, digital-DNA compression,
data-selection model search and topic case studies."""

from .kernels import BACKEND, available_backends

__version__ = "0.1.0"
__all__ = ["BACKEND", "available_backends", "__version__"]
