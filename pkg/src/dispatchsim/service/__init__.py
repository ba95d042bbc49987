"""HTTP service exposing the simulator, optimizer, and study runner."""

from .app import app, create_app

__all__ = ["app", "create_app"]
