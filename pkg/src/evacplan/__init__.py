"""Joint evacuation routing and scheduling on time-expanded graphs."""

__version__ = "0.1.0"
