"""HTTP service exposing the scenario commands and example reproductions."""

from .app import create_app

__all__ = ["create_app"]
