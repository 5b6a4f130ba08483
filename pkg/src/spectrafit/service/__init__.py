"""HTTP service wrapping the spectral fitting library."""

from .app import app, create_app

__all__ = ["app", "create_app"]
