"""Real-time peer-teaching platform: matchmaking, lessons, time banking."""

from .config import Config
from .core import App, UserProfile
from .errors import DomainError

__all__ = ["App", "Config", "UserProfile", "DomainError"]
__version__ = "0.1.0"
