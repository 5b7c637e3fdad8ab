"""HTTP API service over the simulator core."""

from .app import app, create_app

__all__ = ["app", "create_app"]
