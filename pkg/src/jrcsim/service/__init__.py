"""HTTP service wrapping the experiment engine."""

from .app import app

__all__ = ["app"]
