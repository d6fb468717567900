"""HTTP sidecar wrapping speech transcription and text/audio/visual encoders."""

__version__ = "0.1.0"

from .app import create_app, default_app

__all__ = ["create_app", "default_app", "__version__"]
