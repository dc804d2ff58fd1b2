"""Connection integrals in discretized first-order gravity: moments, area
distributions and edge-length measure factors, each with a numerical oracle."""

__version__ = "0.1.0"
