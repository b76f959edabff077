"""Reference model server for the oracle wire protocol."""

from .app import ServerConfig, create_app
from .classifier import DigitsClassifier, MODEL_ID

__all__ = ["DigitsClassifier", "MODEL_ID", "ServerConfig", "create_app"]
