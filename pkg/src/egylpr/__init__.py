"""Classical licence plate detection and recognition for Egyptian plates."""

__version__ = "0.1.0"
